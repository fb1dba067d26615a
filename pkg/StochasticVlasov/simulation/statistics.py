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
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import stats  # type: ignore

from ..errors import StatisticalError

DEFAULT_CI_LEVEL = 0.9973


def z_value(level: float = DEFAULT_CI_LEVEL) -> float:
    """Two-sided normal quantile, e.g. ``0.9973 -> 3.0``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"Confidence level must lie in (0, 1), got {level}")
    return float(stats.norm.ppf(0.5 + 0.5 * level))


def t_value(level: float, dof: int) -> float:
    """Two-sided Student t quantile with ``dof`` degrees of freedom."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"Confidence level must lie in (0, 1), got {level}")
    if dof < 1:
        raise StatisticalError(f"Student t quantile needs at least 1 degree of freedom, got {dof}")
    return float(stats.t.ppf(0.5 + 0.5 * level, dof))


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    halfwidth: float
    samples: int

    @property
    def lower(self) -> float:
        return self.mean - self.halfwidth

    @property
    def upper(self) -> float:
        return self.mean + self.halfwidth

    def covers(self, value: float, slack: float = 0.0) -> bool:
        return abs(self.mean - value) <= self.halfwidth + slack

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "ci": self.halfwidth, "samples": self.samples}


def mean_ci(samples: Any, level: float = DEFAULT_CI_LEVEL, axis: int = 0):
    """Sample mean with a normal-theory confidence half width.

    Returns an `Estimate` for one-dimensional input, otherwise arrays
    ``(mean, stderr, halfwidth)`` reduced along ``axis``.
    """
    data = np.asarray(samples, dtype=float)
    count = data.shape[axis] if data.ndim else 1
    if count < 2:
        raise StatisticalError(f"Need at least 2 samples for a confidence interval, got {count}")
    mean = np.mean(data, axis=axis)
    stderr = np.std(data, axis=axis, ddof=1) / np.sqrt(count)
    halfwidth = z_value(level) * stderr
    if data.ndim == 1:
        return Estimate(float(mean), float(stderr), float(halfwidth), int(count))
    return mean, stderr, halfwidth


def variance_ci(samples: Any, level: float = DEFAULT_CI_LEVEL) -> Estimate:
    """Unbiased variance with a half width from the fourth central moment."""
    data = np.asarray(samples, dtype=float).reshape(-1)
    count = len(data)
    if count < 4:
        raise StatisticalError(f"Need at least 4 samples for a variance interval, got {count}")
    centered = data - np.mean(data)
    variance = float(np.var(data, ddof=1))
    fourth = float(np.mean(centered**4))
    stderr = float(np.sqrt(max(fourth - variance**2, 0.0) / count))
    return Estimate(variance, stderr, z_value(level) * stderr, count)


def require_samples(count: int, minimum: int, what: str):
    if count < minimum:
        raise StatisticalError(f"{what} needs at least {minimum} replicas, got {count}")
