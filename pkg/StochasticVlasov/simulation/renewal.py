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
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import ConfigurationError
from ..utils.data_types import AmplitudeLaw, NoiseVariant
from .noise_model import NoiseSpec
from .streams import StreamPurpose, stream
from .torus_kernel import DensityGrid, synthesize

ALIGNMENT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Blob:
    amplitude: float
    scale: float
    center: np.ndarray


def _require_blob_spec(spec: NoiseSpec):
    if spec.profile is None or spec.ell is None or spec.tau is None or spec.sigma2 is None:
        raise ConfigurationError(f"Noise spec '{spec.label}' carries no blob parameters")


def draw_blob(spec: NoiseSpec, rng: np.random.Generator) -> Blob:
    """One blob ``(R, L, X)`` with ``E[R^2] = sigma_N^2``, ``L ~ U[l_N, 2 l_N]`` and uniform ``X``."""
    _require_blob_spec(spec)
    mean = spec.amplitude_mean
    spread2 = spec.sigma2 - mean**2  # type: ignore
    if spread2 < 0:
        raise ConfigurationError(
            f"Amplitude mean {mean} is incompatible with E[R^2] = sigma_N^2 = {spec.sigma2}"
        )
    if spec.amplitude_law is AmplitudeLaw.two_point:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        amplitude = mean + sign * np.sqrt(spread2)
    else:
        amplitude = mean + np.sqrt(spread2) * rng.standard_normal()
    scale = rng.uniform(spec.ell, 2.0 * spec.ell)  # type: ignore
    center = rng.uniform(-0.5, 0.5, size=3)
    return Blob(float(amplitude), float(scale), center)


def blob_cube(spec: NoiseSpec, blob: Blob) -> np.ndarray:
    """Fourier cube of ``R grad (G * theta_L)(x - X)`` with ``grad G`` taken as ``i k / |k|^2``."""
    cutoff = spec.cube_cutoff
    size = 2 * cutoff + 1
    cube = np.zeros((3, size, size, size), dtype=complex)
    for sign in (1, -1):
        modes = sign * spec.modes
        k2 = np.sum(modes**2, axis=1)
        profile = spec.profile.fourier(blob.scale * np.sqrt(k2))  # type: ignore
        phase = np.exp(-2j * np.pi * modes @ blob.center)
        values = blob.amplitude * 1j * modes / k2[:, np.newaxis] * (profile * phase)[:, np.newaxis]
        index = tuple((modes + cutoff).T)
        for axis in range(3):
            cube[axis][index] = values[:, axis]
    return cube


def blob_field(spec: NoiseSpec, blob: Blob, points: Any) -> np.ndarray:
    return synthesize(blob_cube(spec, blob), points).real


def blob_pairing(spec: NoiseSpec, blob: Blob, mode: Any, amplitude: Any) -> float:
    """Closed form ``<E', a cos(2 pi k0.x)>`` of a single blob field."""
    k0 = np.asarray(mode, dtype=float).reshape(3)
    a = np.asarray(amplitude, dtype=float).reshape(3)
    k2 = float(np.dot(k0, k0))
    if k2 == 0 or k2 > spec.mode_cutoff**2:
        return 0.0
    profile = float(spec.profile.fourier(blob.scale * np.sqrt(k2)))  # type: ignore
    return float(
        blob.amplitude * np.dot(k0, a) / k2 * profile * np.sin(2.0 * np.pi * np.dot(k0, blob.center))
    )


def blob_pairing_quadrature(
    spec: NoiseSpec, blob: Blob, mode: Any, amplitude: Any, resolution: Optional[int] = None
) -> float:
    """Grid quadrature of ``<E', a cos(2 pi k0.x)>``; exact for ``n >= 2M + 2``."""
    n = resolution or 2 * spec.cube_cutoff + 2
    points = DensityGrid(n, np.zeros((n, n, n))).points()
    k0 = np.asarray(mode, dtype=float).reshape(3)
    test = np.cos(2.0 * np.pi * points @ k0)[:, np.newaxis] * np.asarray(amplitude, dtype=float)
    return float(np.mean(np.sum(blob_field(spec, blob, points) * test, axis=1)))


def _validate_alignment(t_grid: np.ndarray, tau: float):
    if np.any(t_grid < 0):
        raise ConfigurationError("Renewal time grid must be non-negative")
    ratio = t_grid / tau
    if np.any(np.abs(ratio - np.round(ratio)) > ALIGNMENT_TOLERANCE):
        raise ConfigurationError(f"Renewal time grid must be aligned to multiples of tau={tau}")


def _interval_index(t: float, tau: float) -> int:
    return int(np.floor(t / tau + ALIGNMENT_TOLERANCE))


class RenewalProcess:
    """Piecewise-constant blob field ``E'(x, t) = E'_n(x)`` on ``[n tau, (n + 1) tau)``.

    Blob ``n`` is drawn from the stream keyed by ``(seed, replica, n)``, so any
    time window can be evaluated in any order.
    """

    def __init__(self, spec: NoiseSpec, seed: int, replica: int):
        if spec.variant is not NoiseVariant.Renewal:
            raise ConfigurationError(f"Renewal process needs a Renewal spec, got {spec.variant.name}")
        _require_blob_spec(spec)
        self.spec = spec
        self.seed = seed
        self.replica = replica
        self._cubes: Dict[int, np.ndarray] = {}

    @property
    def tau(self) -> float:
        return float(self.spec.tau)  # type: ignore

    def blob(self, index: int) -> Blob:
        return draw_blob(self.spec, stream(self.seed, self.replica, index, StreamPurpose.renewal))

    def _cube(self, index: int) -> np.ndarray:
        if index not in self._cubes:
            self._cubes = {key: value for key, value in self._cubes.items() if key >= index - 1}
            self._cubes[index] = blob_cube(self.spec, self.blob(index))
        return self._cubes[index]

    def field(self, points: Any, t: float) -> np.ndarray:
        return synthesize(self._cube(_interval_index(t, self.tau)), points).real

    def kick(self, points: Any, start: float, end: float) -> np.ndarray:
        """``int_start^end E'(x, s) ds`` evaluated exactly for the piecewise-constant field."""
        first = _interval_index(start, self.tau)
        last = _interval_index(end, self.tau)
        total = np.zeros(self._cube(first).shape, dtype=complex)
        for index in range(first, last + 1):
            overlap = min(end, (index + 1) * self.tau) - max(start, index * self.tau)
            if overlap > 0:
                total += overlap * self._cube(index)
        return synthesize(total, points).real


def sample_renewal_field(
    spec: NoiseSpec, t_grid: Any, points: Any, rng: np.random.Generator
) -> np.ndarray:
    """Field values ``(len(t_grid), len(points), 3)`` with blobs drawn in order from ``rng``."""
    _require_blob_spec(spec)
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    _validate_alignment(times, spec.tau)  # type: ignore
    indices = [_interval_index(t, spec.tau) for t in times]  # type: ignore
    blobs: List[Blob] = [draw_blob(spec, rng) for _ in range(max(indices) + 1)] if indices else []
    fields = {index: blob_field(spec, blobs[index], points) for index in set(indices)}
    return np.stack([fields[index] for index in indices]) if indices else np.zeros((0, 0, 3))


def renewal_time_integral(
    spec: NoiseSpec, horizon: float, points: Any, rng: np.random.Generator
) -> np.ndarray:
    """``int_0^T E'(x, t) dt`` over ``T / tau`` blob intervals; covariance tends to ``T Q``."""
    _require_blob_spec(spec)
    intervals = int(round(horizon / spec.tau))  # type: ignore
    _validate_alignment(np.array([horizon]), spec.tau)  # type: ignore
    total = np.zeros((np.asarray(points).reshape(-1, 3).shape[0], 3))
    for _ in range(intervals):
        total += spec.tau * blob_field(spec, draw_blob(spec, rng), points)  # type: ignore
    return total
