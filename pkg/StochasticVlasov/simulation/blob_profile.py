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
from functools import lru_cache
from typing import Any, Tuple

import numpy as np
from scipy import integrate, special  # type: ignore

from ..errors import ConfigurationError, NumericalError
from ..utils.data_types import BlobShape

RADIAL_ORDER = 256
CHI_RTOL = 1e-8


@lru_cache(maxsize=None)
def _radial_nodes(radius: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    return 0.5 * radius * (nodes + 1.0), 0.5 * radius * weights


def _bump(u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) < 1.0
    out = np.zeros_like(u, dtype=float)
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_scale(radius: float, mass: float) -> float:
    r, w = _radial_nodes(radius, RADIAL_ORDER)
    return mass / float(np.sum(w * 4.0 * np.pi * r**2 * _bump(r / radius)))


@lru_cache(maxsize=None)
def _bump_shell(radius: float, mass: float) -> Tuple[np.ndarray, np.ndarray]:
    r, w = _radial_nodes(radius, RADIAL_ORDER)
    return r, w * 4.0 * np.pi * r**2 * _bump_scale(radius, mass) * _bump(r / radius)


@dataclass(frozen=True)
class BlobProfile:
    """Radial blob ``theta`` with ``L1`` norm ``mass``.

    ``radius`` is the support radius of the bump, or the standard deviation
    of the Gaussian profile.
    """

    shape: BlobShape = BlobShape.bump
    radius: float = 0.25
    mass: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.radius < 0.5:
            raise ConfigurationError(
                f"Blob radius must lie in (0, 1/2) to stay inside the unit cell, got {self.radius}"
            )
        if self.mass <= 0:
            raise ConfigurationError(f"Blob mass must be positive, got {self.mass}")

    @property
    def l1_norm(self) -> float:
        return self.mass

    def value(self, r: Any) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.shape is BlobShape.gaussian:
            s2 = self.radius**2
            return self.mass * (2.0 * np.pi * s2) ** -1.5 * np.exp(-(r**2) / (2.0 * s2))
        return _bump_scale(self.radius, self.mass) * _bump(r / self.radius)

    def fourier(self, xi: Any) -> np.ndarray:
        """Radial Fourier transform ``theta_hat(|xi|)`` under the ``exp(-2 pi i xi.x)`` convention."""
        xi = np.abs(np.asarray(xi, dtype=float))
        if self.shape is BlobShape.gaussian:
            return self.mass * np.exp(-2.0 * np.pi**2 * self.radius**2 * xi**2)
        r, shell = _bump_shell(self.radius, self.mass)
        return np.sinc(2.0 * np.multiply.outer(xi, r)) @ shell


def _validate_scale(ell: float):
    if not 0.0 < ell <= 0.25:
        raise ConfigurationError(f"Blob scale must satisfy 0 < l_N <= 1/4, got {ell}")


@lru_cache(maxsize=4096)
def _chi(k_norm: float, ell: float, profile: BlobProfile) -> float:
    def integrand(scale):
        return float(profile.fourier(scale * k_norm)) ** 2

    result = integrate.quad(
        integrand, ell, 2.0 * ell, epsrel=CHI_RTOL, epsabs=1e-15, limit=200, full_output=1
    )
    if len(result) > 3:
        raise NumericalError(
            f"Quadrature for chi(|k|={k_norm}, l_N={ell}) did not converge: {result[3]} "
            f"(estimate {result[0]}, error {result[1]})"
        )
    return float(np.sqrt(max(result[0], 0.0) / ell))


def blob_chi(k: Any, ell: float, profile: BlobProfile) -> float:
    """``chi_N(k) = sqrt(l_N^-1 int_{l_N}^{2 l_N} |theta_hat(l k)|^2 dl)``; depends on ``|k|`` only."""
    _validate_scale(ell)
    k_norm = float(np.linalg.norm(np.asarray(k, dtype=float)))
    if k_norm == 0.0:
        raise ConfigurationError("chi is not defined at k = 0")
    return _chi(k_norm, float(ell), profile)


def blob_chi_closed_form(k: Any, ell: float, profile: BlobProfile) -> float:
    """Exact ``chi_N`` for the Gaussian profile."""
    if profile.shape is not BlobShape.gaussian:
        raise ConfigurationError("Closed form chi exists only for the gaussian blob profile")
    k_norm = float(np.linalg.norm(np.asarray(k, dtype=float)))
    a = np.sqrt(4.0 * np.pi**2 * profile.radius**2 * k_norm**2)
    integral = np.sqrt(np.pi) / (2.0 * a) * (special.erf(2.0 * ell * a) - special.erf(ell * a))
    return float(profile.mass * np.sqrt(integral / ell))
