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
"""Split-step integrators for the stochastic characteristics.

One step is: half drift, self-consistent field kick, exact magnetic rotation,
noise kick, half drift.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np

from ..errors import ConfigurationError, NumericalError
from ..utils.data_types import NoiseEvaluation
from .noise_model import NoiseSpec, increment_cube
from .renewal import RenewalProcess
from .streams import StreamPurpose, refined_normals
from .torus_kernel import (
    DensityGrid,
    SpectralKernel,
    build_kernel,
    density_transform,
    structure_factor,
    synthesize,
    wrap,
)

FieldFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(eq=False)
class ParticleEnsemble:
    positions: np.ndarray
    velocities: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.velocities = np.asarray(self.velocities, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if not (len(self.positions) == len(self.velocities) == len(self.weights)):
            raise ConfigurationError(
                f"Ensemble arrays disagree: {len(self.positions)} positions, "
                f"{len(self.velocities)} velocities, {len(self.weights)} weights"
            )
        if np.any(self.weights < 0):
            raise ConfigurationError("Particle weights must be non-negative")

    @property
    def count(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.positions.copy(), self.velocities.copy(), self.weights.copy())


@dataclass(frozen=True)
class StepConfig:
    dt: float
    magnetic: float = 0.0
    delta: float = 0.05
    mode_cutoff: int = 4
    self_consistent: bool = True
    coulomb_sign: float = 1.0
    noise_evaluation: NoiseEvaluation = NoiseEvaluation.midpoint
    scheme: str = "strang"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"Time step must be positive, got {self.dt}")
        if abs(self.magnetic) * self.dt >= np.pi:
            raise ConfigurationError(
                f"|B| dt must stay below pi for a resolved rotation, got {abs(self.magnetic) * self.dt}"
            )
        if self.scheme != "strang":
            raise ConfigurationError(f"Unknown splitting scheme '{self.scheme}'")

    def kernel(self) -> Optional[SpectralKernel]:
        if not self.self_consistent:
            return None
        return cached_kernel(self.mode_cutoff, self.delta, self.coulomb_sign)


@lru_cache(maxsize=32)
def cached_kernel(mode_cutoff: int, delta: float, coulomb_sign: float) -> SpectralKernel:
    return build_kernel(mode_cutoff, delta, coulomb_sign)


def rotate_magnetic(velocities: Any, magnetic: float, dt: float) -> np.ndarray:
    """Exact flow of ``dv/dt = B v x e3`` with ``v x e3 = (v2, -v1, 0)``."""
    v = np.asarray(velocities, dtype=float)
    if magnetic == 0:
        return v.copy()
    angle = magnetic * dt
    cos, sin = np.cos(angle), np.sin(angle)
    rotated = v.copy()
    rotated[..., 0] = cos * v[..., 0] + sin * v[..., 1]
    rotated[..., 1] = -sin * v[..., 0] + cos * v[..., 1]
    return rotated


def self_consistent_field(kernel: SpectralKernel, weights: np.ndarray) -> FieldFunction:
    def field(positions: np.ndarray) -> np.ndarray:
        rho = structure_factor(positions, weights, kernel.mode_cutoff)
        return synthesize(kernel.coeffs * rho[np.newaxis], positions).real

    return field


def frozen_field(kernel: SpectralKernel, source: Any) -> FieldFunction:
    """Field of a fixed density, e.g. a `DensityGrid` of the initial state."""
    coeffs = kernel.coeffs * density_transform(source, kernel.mode_cutoff)[np.newaxis]

    def field(positions: np.ndarray) -> np.ndarray:
        return synthesize(coeffs, positions).real

    return field


def split_step(
    ensemble: ParticleEnsemble,
    cfg: StepConfig,
    field: Optional[FieldFunction],
    noise_kick: Optional[Callable[[np.ndarray], np.ndarray]],
    wrap_positions: bool = True,
) -> ParticleEnsemble:
    start = ensemble.positions
    half = 0.5 * cfg.dt
    x = start + half * ensemble.velocities
    v = ensemble.velocities
    if field is not None:
        v = v + cfg.dt * field(x)
    v = rotate_magnetic(v, cfg.magnetic, cfg.dt)
    if noise_kick is not None:
        kick_at = x if cfg.noise_evaluation is NoiseEvaluation.midpoint else start
        v = v + noise_kick(kick_at)
    x = x + half * v
    return ParticleEnsemble(wrap(x) if wrap_positions else x, v, ensemble.weights)


def _field_for(ensemble: ParticleEnsemble, cfg: StepConfig, kernel: Optional[SpectralKernel]):
    kernel = kernel if kernel is not None else cfg.kernel()
    if kernel is None or not cfg.self_consistent:
        return None
    return self_consistent_field(kernel, ensemble.weights)


def step_common_noise(
    ensemble: ParticleEnsemble,
    spec: Optional[NoiseSpec],
    cfg: StepConfig,
    rng: Optional[np.random.Generator] = None,
    normals: Optional[np.ndarray] = None,
    kernel: Optional[SpectralKernel] = None,
    renewal: Optional[RenewalProcess] = None,
    time: float = 0.0,
) -> ParticleEnsemble:
    """One step in which every particle is kicked by the same field increment.

    The noise coefficient depends on position only, so the Stratonovich and
    Ito kicks coincide and no correction drift is added.
    """
    kick = None
    if renewal is not None:
        kick = lambda points: renewal.kick(points, time, time + cfg.dt)  # noqa: E731
    elif spec is not None and spec.kappa > 0:
        if normals is None:
            if rng is None:
                raise ValueError("Common-noise step needs rng or normals")
            normals = rng.standard_normal(2 * len(spec.modes))
        cube = increment_cube(spec, normals, cfg.dt)
        kick = lambda points: synthesize(cube, points).real  # noqa: E731
    return split_step(ensemble, cfg, _field_for(ensemble, cfg, kernel), kick)


def step_independent_noise(
    ensemble: ParticleEnsemble,
    kappa: float,
    cfg: StepConfig,
    rng: Optional[np.random.Generator] = None,
    normals: Optional[np.ndarray] = None,
    kernel: Optional[SpectralKernel] = None,
) -> ParticleEnsemble:
    """One step of the mean-field limit: independent kicks ``sqrt(2 kappa dt) eta_i``."""
    if kappa < 0:
        raise ConfigurationError(f"kappa must be non-negative, got {kappa}")
    kick = None
    if kappa > 0:
        if normals is None:
            if rng is None:
                raise ValueError("Independent-noise step needs rng or normals")
            normals = rng.standard_normal((ensemble.count, 3))
        increments = np.sqrt(2.0 * kappa * cfg.dt) * np.asarray(normals).reshape(-1, 3)
        kick = lambda points: increments  # noqa: E731
    return split_step(ensemble, cfg, _field_for(ensemble, cfg, kernel), kick)


def jacobian_probe(
    cfg: StepConfig,
    spec: Optional[NoiseSpec],
    seed: int,
    base_point: Any,
    h: float = 1e-4,
    horizon: float = 0.5,
    draws_per_step: int = 1,
    background: Optional[DensityGrid] = None,
    replica: int = 0,
) -> float:
    """``|det D Phi_t|`` at ``base_point = (x, v)`` from central differences.

    Six probe directions, each displaced by ``+h`` and ``-h``, follow the same
    frozen noise path and the frozen field of ``background``.
    """
    base = np.asarray(base_point, dtype=float).reshape(6)
    if not h > 0:
        raise ConfigurationError(f"Probe size must be positive, got {h}")
    steps = int(round(horizon / cfg.dt))
    offsets = np.vstack([h * np.eye(6), -h * np.eye(6)])
    state = base + offsets
    ensemble = ParticleEnsemble(state[:, :3], state[:, 3:], np.zeros(12))
    kernel = cfg.kernel()
    field = frozen_field(kernel, background) if kernel is not None and background is not None else None
    active = spec is not None and spec.kappa > 0
    for step in range(steps):
        kick = None
        if active:
            normals = refined_normals(
                seed, replica, step, 2 * len(spec.modes), draws_per_step, StreamPurpose.probe  # type: ignore
            )
            cube = increment_cube(spec, normals, cfg.dt)  # type: ignore
            kick = lambda points, cube=cube: synthesize(cube, points).real  # noqa: E731
        ensemble = split_step(ensemble, cfg, field, kick, wrap_positions=False)
    final = np.hstack([ensemble.positions, ensemble.velocities])
    jacobian = (final[:6] - final[6:]).T / (2.0 * h)
    determinant = float(np.linalg.det(jacobian))
    if not np.isfinite(determinant) or np.linalg.cond(jacobian) > 1e12:
        raise NumericalError(
            f"Degenerate displacement matrix at base point {base.tolist()} (det={determinant})"
        )
    return abs(determinant)
