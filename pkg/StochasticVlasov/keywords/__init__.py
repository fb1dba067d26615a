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

from .configuration import Configuration
from .diagnostics import Diagnostics
from .dynamics import ParticleDynamics
from .experiment import ScalingExperiment
from .kernel import TorusKernel
from .noise import NoiseModel
from .verification import Verification

__all__ = [
    "Configuration",
    "Diagnostics",
    "NoiseModel",
    "ParticleDynamics",
    "ScalingExperiment",
    "TorusKernel",
    "Verification",
]
