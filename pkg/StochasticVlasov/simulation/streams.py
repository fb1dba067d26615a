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
from enum import IntEnum
from typing import Dict

import numpy as np


class StreamPurpose(IntEnum):
    noise = 0
    initial_state = 1
    renewal = 2
    probe = 3


def stream(seed: int, replica: int, step: int, purpose: StreamPurpose) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, replica, step, purpose)``.

    Identical keys give identical draws no matter which thread asks for them.
    """
    for name, value in (("seed", seed), ("replica", replica), ("step", step)):
        if value < 0:
            raise ValueError(f"Stream key '{name}' must be non-negative, got {value}")
    key = np.random.SeedSequence([int(seed), int(replica), int(step), int(purpose)])
    return np.random.Generator(np.random.Philox(key))


def refined_normals(
    seed: int,
    replica: int,
    step: int,
    shape,
    draws_per_step: int = 1,
    purpose: StreamPurpose = StreamPurpose.noise,
) -> np.ndarray:
    """Standard normals of one coarse step built from ``draws_per_step`` fine draws.

    Fine draw ``j`` of coarse step ``n`` is keyed by fine index ``n * draws_per_step + j``,
    so coarse steps are exact Brownian aggregates of the fine path.
    """
    if draws_per_step == 1:
        return stream(seed, replica, step, purpose).standard_normal(shape)
    total = np.zeros(shape)
    first = step * draws_per_step
    for fine in range(first, first + draws_per_step):
        total += stream(seed, replica, fine, purpose).standard_normal(shape)
    return total / np.sqrt(draws_per_step)


def provenance(seed: int, replica: int) -> Dict:
    return {
        "bit_generator": "Philox",
        "key": ["seed", "replica", "step", "purpose"],
        "purposes": {purpose.name: int(purpose) for purpose in StreamPurpose},
        "seed": int(seed),
        "replica": int(replica),
    }
