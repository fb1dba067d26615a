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
"""Gradient-type Gaussian noise fields with a prescribed covariance.

Every family is reduced to spectral weights ``lambda_k`` over the half lattice
(first nonzero coordinate positive), with

    Q(x) = sum_k lambda_k (k/|k| x k/|k|) cos(2 pi k.x),   tr Q(0) = sum_k lambda_k = 6 kappa.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import ConfigurationError
from ..utils.data_types import AmplitudeLaw, NoiseVariant
from .blob_profile import BlobProfile, blob_chi
from .torus_kernel import TWO_PI, lattice_modes, positive_half, synthesize


@dataclass(frozen=True, eq=False)
class CanonicalCoefficients:
    modes: np.ndarray
    gammas: np.ndarray
    family_index: int

    @property
    def retained(self) -> int:
        return int(np.count_nonzero(self.gammas))

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.gammas**2)))

    @property
    def linf_norm(self) -> float:
        return float(np.max(np.abs(self.gammas)))


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    variant: NoiseVariant
    kappa: float
    mode_cutoff: int
    modes: np.ndarray
    weights: np.ndarray
    family_index: Optional[int] = None
    gammas: Optional[np.ndarray] = None
    profile: Optional[BlobProfile] = None
    ell: Optional[float] = None
    tau: Optional[float] = None
    kT2: Optional[float] = None
    sigma2: Optional[float] = None
    chis: Optional[np.ndarray] = None
    amplitude_law: AmplitudeLaw = AmplitudeLaw.two_point
    amplitude_mean: float = 0.0
    label: str = field(default="")

    @property
    def trace(self) -> float:
        return float(np.sum(self.weights))

    @property
    def cube_cutoff(self) -> int:
        return int(np.max(np.abs(self.modes))) if len(self.modes) else 1

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.modes, axis=1)

    @property
    def units(self) -> np.ndarray:
        return self.modes / self.norms[:, np.newaxis]

    def with_kappa(self, kappa: float) -> "NoiseSpec":
        """Same correlation structure rescaled to another single-point covariance."""
        if kappa < 0:
            raise ConfigurationError(f"kappa must be non-negative, got {kappa}")
        scale = kappa / self.kappa if self.kappa > 0 else 0.0
        return replace(self, kappa=kappa, weights=self.weights * scale)


def _renormalized(weights: np.ndarray, kappa: float) -> np.ndarray:
    total = np.sum(weights)
    if total <= 0:
        raise ConfigurationError("Noise spec has no active modes")
    return weights * (6.0 * kappa / total)


def canonical_coefficients(family_index: int, mode_cutoff: int) -> CanonicalCoefficients:
    """Flat coefficients ``c_N`` over ``0 < |k|_inf <= N`` inside the cube ``|k|_inf <= M``."""
    if int(family_index) != family_index or family_index < 1:
        raise ConfigurationError(f"Family index N must be a positive integer, got {family_index}")
    if family_index > mode_cutoff:
        raise ConfigurationError(
            f"Family index N={family_index} exceeds the mode cutoff M={mode_cutoff}"
        )
    modes = lattice_modes(int(mode_cutoff))
    active = np.max(np.abs(modes), axis=1) <= family_index
    gammas = np.where(active, 1.0 / np.sqrt(np.count_nonzero(active)), 0.0)
    gammas = gammas / np.sqrt(np.sum(gammas**2))
    return CanonicalCoefficients(modes, gammas, int(family_index))


def canonical_noise(kappa: float, family_index: int, mode_cutoff: Optional[int] = None) -> NoiseSpec:
    _validate_kappa(kappa)
    cutoff = family_index if mode_cutoff is None else mode_cutoff
    coefficients = canonical_coefficients(family_index, cutoff)
    plus = positive_half(coefficients.modes) & (coefficients.gammas != 0)
    modes = coefficients.modes[plus]
    # Gamma is even in k, so the pair (k, -k) contributes 6 kappa (G_k^2 + G_-k^2).
    weights = _renormalized(12.0 * kappa * coefficients.gammas[plus] ** 2, kappa)
    return NoiseSpec(
        variant=NoiseVariant.Canonical,
        kappa=float(kappa),
        mode_cutoff=int(cutoff),
        modes=modes,
        weights=weights,
        family_index=int(family_index),
        gammas=coefficients.gammas[plus],
        label=f"canonical N={family_index}",
    )


def ball_modes(mode_cutoff: int) -> np.ndarray:
    """Half-lattice modes with ``0 < |k| <= M`` (Euclidean)."""
    if int(mode_cutoff) != mode_cutoff or mode_cutoff < 1:
        raise ConfigurationError(f"Mode cutoff M must be a positive integer, got {mode_cutoff}")
    modes = lattice_modes(int(mode_cutoff))
    inside = np.sum(modes**2, axis=1) <= mode_cutoff**2
    modes = modes[inside]
    return modes[positive_half(modes)]


def _chi_table(modes: np.ndarray, ell: float, profile: BlobProfile) -> np.ndarray:
    squared = np.sum(modes**2, axis=1)
    table = {int(k2): blob_chi([np.sqrt(k2), 0.0, 0.0], ell, profile) for k2 in np.unique(squared)}
    return np.array([table[int(k2)] for k2 in squared])


def blob_sigma(ell: float, profile: BlobProfile, mode_cutoff: int, kT2: float) -> float:
    """``sigma_N^2 = k_T^2 / (2 sum_{Z+, |k| <= M} chi_N(k)^2 / |k|^2)``."""
    if kT2 <= 0:
        raise ConfigurationError(f"k_T^2 must be positive, got {kT2}")
    modes = ball_modes(mode_cutoff)
    if len(modes) == 0:
        raise ConfigurationError(f"No lattice modes inside |k| <= {mode_cutoff}")
    chis = _chi_table(modes, ell, profile)
    return float(kT2 / (2.0 * np.sum(chis**2 / np.sum(modes**2, axis=1))))


def blob_noise(
    tau: float,
    kT2: float,
    ell: float,
    profile: Optional[BlobProfile] = None,
    mode_cutoff: int = 4,
    renewal: bool = False,
    amplitude_law: AmplitudeLaw = AmplitudeLaw.two_point,
    amplitude_mean: float = 0.0,
) -> NoiseSpec:
    if tau <= 0:
        raise ConfigurationError(f"Correlation time tau must be positive, got {tau}")
    if kT2 <= 0:
        raise ConfigurationError(f"k_T^2 must be positive, got {kT2}")
    profile = profile or BlobProfile()
    modes = ball_modes(mode_cutoff)
    chis = _chi_table(modes, ell, profile)
    k2 = np.sum(modes**2, axis=1)
    sigma2 = float(kT2 / (2.0 * np.sum(chis**2 / k2)))
    kappa = tau * kT2 / 6.0
    weights = _renormalized(2.0 * tau * sigma2 * chis**2 / k2, kappa)
    variant = NoiseVariant.Renewal if renewal else NoiseVariant.Blob
    return NoiseSpec(
        variant=variant,
        kappa=float(kappa),
        mode_cutoff=int(mode_cutoff),
        modes=modes,
        weights=weights,
        profile=profile,
        ell=float(ell),
        tau=float(tau),
        kT2=float(kT2),
        sigma2=sigma2,
        chis=chis,
        amplitude_law=amplitude_law,
        amplitude_mean=float(amplitude_mean),
        label=f"{variant.name.lower()} l_N={ell}",
    )


def spectral_noise(kappa: float, modes: Any, weights: Any) -> NoiseSpec:
    """Noise from explicit half-lattice modes and relative weights, renormalized to ``6 kappa``."""
    _validate_kappa(kappa)
    modes = np.asarray(modes, dtype=int).reshape(-1, 3)
    if np.any(np.all(modes == 0, axis=1)):
        raise ConfigurationError("Mode k = 0 carries no gradient field")
    modes = np.where(positive_half(modes)[:, np.newaxis], modes, -modes)
    weights = _renormalized(np.asarray(weights, dtype=float).reshape(-1), kappa)
    return NoiseSpec(
        variant=NoiseVariant.Canonical,
        kappa=float(kappa),
        mode_cutoff=int(np.max(np.abs(modes))),
        modes=modes,
        weights=weights,
        label="spectral",
    )


def _validate_kappa(kappa: float):
    if kappa <= 0:
        raise ConfigurationError(f"kappa must be positive, got {kappa}")


def covariance_at(spec: NoiseSpec, lag: Any) -> np.ndarray:
    """``Q(lag)`` as a 3x3 matrix, or an ``(n, 3, 3)`` stack for a list of lags."""
    lags = np.asarray(lag, dtype=float)
    single = lags.ndim == 1
    lags = lags.reshape(-1, 3)
    units = spec.units
    outer = units[:, :, np.newaxis] * units[:, np.newaxis, :]
    phases = np.cos(TWO_PI * lags @ spec.modes.T) * spec.weights
    result = np.einsum("nm,mij->nij", phases, outer)
    return result[0] if single else result


def covariance_grid(spec: NoiseSpec, resolution: int) -> np.ndarray:
    """``Q`` on the grid nodes ``-1/2 + i/n`` as an ``(n, n, n, 3, 3)`` array."""
    cutoff = spec.cube_cutoff
    if resolution < 2 * cutoff + 2:
        raise ConfigurationError(
            f"Quadrature resolution {resolution} aliases modes up to {cutoff}; "
            f"need at least {2 * cutoff + 2}"
        )
    units = spec.units
    parity = np.where(np.sum(spec.modes, axis=1) % 2 == 0, 1.0, -1.0)
    plus = tuple((spec.modes % resolution).T)
    minus = tuple((-spec.modes % resolution).T)
    grid = np.zeros((resolution,) * 3 + (3, 3))
    for a in range(3):
        for b in range(a, 3):
            cube = np.zeros((resolution,) * 3, dtype=complex)
            values = 0.5 * spec.weights * units[:, a] * units[:, b] * parity
            np.add.at(cube, plus, values)
            np.add.at(cube, minus, values)
            component = np.fft.ifftn(cube).real * resolution**3
            grid[..., a, b] = component
            grid[..., b, a] = component
    return grid


def covariance_lr_norm(spec: NoiseSpec, r: float, resolution: Optional[int] = None) -> float:
    """``||Q||_{L^r}`` of the pointwise Frobenius norm over the torus.

    ``r = 2`` is exact through Parseval; other exponents use grid quadrature
    with ``4M + 2`` nodes per axis unless ``resolution`` is given.
    """
    if not r >= 1:
        raise ConfigurationError(f"Exponent r must satisfy r >= 1, got {r}")
    if r == 2:
        return float(np.sqrt(0.5 * np.sum(spec.weights**2)))
    n = resolution or 4 * spec.mode_cutoff + 2
    frobenius = np.sqrt(np.sum(covariance_grid(spec, n) ** 2, axis=(-2, -1)))
    if np.isinf(r):
        return float(np.max(frobenius))
    return float(np.mean(frobenius**r) ** (1.0 / r))


def covariance_pairing(spec: NoiseSpec, mode: Any, amplitude: Any) -> float:
    """``<Q phi, phi>`` for ``phi(x) = a cos(2 pi k0.x)``."""
    k0 = np.asarray(mode, dtype=int).reshape(3)
    a = np.asarray(amplitude, dtype=float).reshape(3)
    match = np.all(spec.modes == k0, axis=1) | np.all(spec.modes == -k0, axis=1)
    if not np.any(match):
        return 0.0
    unit = k0 / np.linalg.norm(k0)
    return float(0.25 * np.sum(spec.weights[match]) * np.dot(unit, a) ** 2)


def increment_cube(spec: NoiseSpec, normals: np.ndarray, dt: float) -> np.ndarray:
    """Fourier cube of one field increment from ``2 m`` standard normals (cos then sin parts)."""
    count = len(spec.modes)
    normals = np.asarray(normals, dtype=float).reshape(-1)
    if normals.shape[0] < 2 * count:
        raise ValueError(f"Need {2 * count} normals for {count} modes, got {normals.shape[0]}")
    cutoff = spec.cube_cutoff
    size = 2 * cutoff + 1
    amplitude = np.sqrt(spec.weights * dt)[:, np.newaxis] * spec.units
    half = 0.5 * amplitude * (normals[:count] - 1j * normals[count : 2 * count])[:, np.newaxis]
    cube = np.zeros((3, size, size, size), dtype=complex)
    plus = tuple((spec.modes + cutoff).T)
    minus = tuple((-spec.modes + cutoff).T)
    for axis in range(3):
        cube[axis][plus] = half[:, axis]
        cube[axis][minus] = np.conj(half[:, axis])
    return cube


def sample_field_increments(
    spec: NoiseSpec,
    points: Any,
    dt: float,
    rng: Optional[np.random.Generator] = None,
    normals: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Common-noise increments ``dW(x_i)`` with covariance ``Q(x - y) dt``.

    One set of mode normals is shared by all points. Pass ``normals`` to reuse
    a frozen draw, otherwise ``2 m`` normals are drawn from ``rng``.
    """
    if dt <= 0:
        raise ConfigurationError(f"Time step must be positive, got {dt}")
    if normals is None:
        if rng is None:
            raise ValueError("Either rng or normals is required")
        normals = rng.standard_normal(2 * len(spec.modes))
    return synthesize(increment_cube(spec, normals, dt), points).real


def sample_increment_batch(spec: NoiseSpec, points: Any, dt: float, normals: np.ndarray) -> np.ndarray:
    """Increments for a batch of independent draws, shape ``(draws, points, 3)``.

    Row ``d`` of ``normals`` (cos parts then sin parts) gives the same field as
    `increment_cube` synthesized at ``points``.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    normals = np.asarray(normals, dtype=float).reshape(-1, 2 * len(spec.modes))
    count = len(spec.modes)
    phase = TWO_PI * points @ spec.modes.T
    amplitude = np.sqrt(spec.weights * dt)
    cos_part = np.einsum("dm,pm,mc->dpc", normals[:, :count] * amplitude, np.cos(phase), spec.units)
    sin_part = np.einsum("dm,pm,mc->dpc", normals[:, count:] * amplitude, np.sin(phase), spec.units)
    return cos_part + sin_part


def covariance_table(spec: NoiseSpec) -> List[Dict]:
    rows = []
    units = spec.units
    for index, k in enumerate(spec.modes):
        contribution = spec.weights[index] * np.outer(units[index], units[index])
        rows.append(
            {
                "k1": int(k[0]),
                "k2": int(k[1]),
                "k3": int(k[2]),
                "norm": float(np.linalg.norm(k)),
                "chi": float(spec.chis[index]) if spec.chis is not None else "",
                "gamma": float(spec.gammas[index]) if spec.gammas is not None else "",
                "lambda": float(spec.weights[index]),
                "q11": float(contribution[0, 0]),
                "q12": float(contribution[0, 1]),
                "q13": float(contribution[0, 2]),
                "q22": float(contribution[1, 1]),
                "q23": float(contribution[1, 2]),
                "q33": float(contribution[2, 2]),
            }
        )
    return rows
