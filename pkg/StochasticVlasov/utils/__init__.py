# Copyright 2020-     Robot Framework Foundation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# flake8: noqa

from .data_types import (
    AmplitudeLaw,
    BlobShape,
    CheckStatus,
    NoiseEvaluation,
    NoiseVariant,
    ObservableKind,
    ObservableSpec,
    SteppingMode,
    VelocityBox,
    convert_typed_dict,
)
from .meta_python import find_by_name, to_plain
from .misc import as_mode, as_points, keyword
from .robot_booleans import is_boolean_like, is_truthy
