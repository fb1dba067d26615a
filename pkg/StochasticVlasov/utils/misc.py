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

import inspect
from typing import Any, Sequence, Tuple

import numpy as np


def keyword(name: Any = None, tags: Tuple = (), types: Tuple = ()):
    if inspect.isroutine(name):
        return keyword()(name)

    def decorator(func):
        func.robot_name = name
        func.robot_tags = tags
        func.robot_types = types
        return func

    return decorator


def as_points(points: Any) -> np.ndarray:
    """Coerce a single 3-vector or a list of them into a ``(n, 3)`` float array."""
    array = np.asarray(points, dtype=float)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2 or array.shape[1] != 3:
        raise ValueError(
            f"Expected a 3-vector or a list of 3-vectors, got shape {array.shape}"
        )
    return array


def as_mode(mode: Sequence) -> np.ndarray:
    array = np.asarray(mode, dtype=int).reshape(-1)
    if array.shape != (3,):
        raise ValueError(f"Lattice mode needs three integer components, got {mode}")
    return array