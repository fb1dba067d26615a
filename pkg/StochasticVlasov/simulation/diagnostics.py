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
"""Energy balance, martingale bounds, norms and observables of particle runs.

Kinetic energy is ``K = sum_i w_i |V_i|^2`` (no factor one half), so that
``K + V_delta`` is conserved by the deterministic flow and

    M_t = K(t) + V(t) - K(0) - V(0) - 6 kappa t W

is the energy martingale of the noisy flow.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid  # type: ignore

from ..errors import ConfigurationError, StatisticalError
from ..utils.data_types import ObservableKind
from .statistics import DEFAULT_CI_LEVEL, mean_ci, require_samples, z_value
from .torus_kernel import TWO_PI, DensityGrid

MIN_QV_REPLICAS = 32
ROUND_OFF = 1e-12


@dataclass(frozen=True)
class Observable:
    """``phi(x, v) = cos|sin(2 pi l.x) exp(-|v - v0|^2 / 2 s^2)``; ``s = inf`` drops the window."""

    mode: Tuple[int, int, int] = (0, 0, 0)
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 1.0
    kind: ObservableKind = ObservableKind.cos

    def __post_init__(self):
        object.__setattr__(self, "mode", tuple(int(m) for m in self.mode))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "width", float(self.width))
        if len(self.mode) != 3 or len(self.center) != 3:
            raise ConfigurationError(f"Observable needs a 3-vector mode and center, got {self}")
        if not self.width > 0:
            raise ConfigurationError(f"Observable window width must be positive, got {self.width}")

    @property
    def name(self) -> str:
        mode = ",".join(str(m) for m in self.mode)
        center = ",".join(f"{c:g}" for c in self.center)
        return f"{self.kind.name}[l={mode};v0={center};s={self.width:g}]"

    def spatial(self, positions: np.ndarray) -> np.ndarray:
        phase = TWO_PI * (np.asarray(positions).reshape(-1, 3) @ np.asarray(self.mode, dtype=float))
        return np.cos(phase) if self.kind is ObservableKind.cos else np.sin(phase)

    def window(self, velocities: np.ndarray) -> np.ndarray:
        velocities = np.asarray(velocities).reshape(-1, 3)
        if np.isinf(self.width):
            return np.ones(len(velocities))
        offset = velocities - np.asarray(self.center)
        return np.exp(-np.sum(offset**2, axis=1) / (2.0 * self.width**2))

    def evaluate(self, positions: Any, velocities: Any) -> np.ndarray:
        return self.spatial(positions) * self.window(velocities)

    def to_dict(self) -> Dict:
        return {
            "mode": list(self.mode),
            "center": list(self.center),
            "width": "inf" if np.isinf(self.width) else self.width,
            "kind": self.kind.name,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Observable":
        kind = data.get("kind", ObservableKind.cos)
        return cls(
            mode=tuple(data.get("mode", (0, 0, 0))),
            center=tuple(data.get("center", (0.0, 0.0, 0.0))),
            width=float(data.get("width", 1.0)),
            kind=kind if isinstance(kind, ObservableKind) else ObservableKind[str(kind)],
        )


def default_battery() -> Tuple[Observable, ...]:
    """``l in {0, e1, e1+e2}`` x ``v0 in {0, e1}`` x ``s in {0.5, 1}``."""
    return tuple(
        Observable(mode, center, width)
        for mode in ((0, 0, 0), (1, 0, 0), (1, 1, 0))
        for center in ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
        for width in (0.5, 1.0)
    )


def kinetic_energy(ensemble) -> float:
    return float(np.sum(ensemble.weights * np.sum(ensemble.velocities**2, axis=1)))


def observable_value(ensemble, observable: Observable) -> float:
    return float(np.sum(ensemble.weights * observable.evaluate(ensemble.positions, ensemble.velocities)))


@dataclass
class EnergyLedger:
    kappa: float
    total_weight: float
    times: List[float] = field(default_factory=list)
    kinetic: List[float] = field(default_factory=list)
    potential: List[float] = field(default_factory=list)

    def record(self, t: float, kinetic: float, potential: float):
        if self.times and t < self.times[-1]:
            raise ValueError(f"Ledger is append-only in time: {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.kinetic.append(float(kinetic))
        self.potential.append(float(potential))

    @property
    def residual(self) -> np.ndarray:
        return energy_identity_residual(self)

    def to_dict(self) -> Dict:
        return {
            "kappa": self.kappa,
            "total_weight": self.total_weight,
            "times": list(self.times),
            "kinetic": list(self.kinetic),
            "potential": list(self.potential),
            "residual": self.residual.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "EnergyLedger":
        return cls(
            float(data["kappa"]),
            float(data["total_weight"]),
            [float(t) for t in data["times"]],
            [float(k) for k in data["kinetic"]],
            [float(v) for v in data["potential"]],
        )


def energy_identity_residual(ledger: EnergyLedger) -> np.ndarray:
    if not ledger.times:
        return np.zeros(0)
    times = np.asarray(ledger.times)
    energy = np.asarray(ledger.kinetic) + np.asarray(ledger.potential)
    return energy - energy[0] - 6.0 * ledger.kappa * (times - times[0]) * ledger.total_weight


@dataclass
class SeriesReport:
    """Per-time statistic against a bound or target, exportable as CSV rows."""

    name: str
    times: np.ndarray
    statistic: np.ndarray
    bound: np.ndarray
    ci: np.ndarray
    passed: bool
    details: Dict = field(default_factory=dict)

    def rows(self) -> List[List[float]]:
        return [
            [float(t), float(s), float(b), float(c)]
            for t, s, b, c in zip(self.times, self.statistic, self.bound, self.ci)
        ]

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "times": np.asarray(self.times).tolist(),
            "statistic": np.asarray(self.statistic).tolist(),
            "bound": np.asarray(self.bound).tolist(),
            "ci": np.asarray(self.ci).tolist(),
            "details": self.details,
        }


def _stack(ledgers: Sequence[EnergyLedger], series: Callable[[EnergyLedger], Any]) -> np.ndarray:
    if not ledgers:
        raise StatisticalError("No ledgers given")
    times = ledgers[0].times
    for ledger in ledgers[1:]:
        if len(ledger.times) != len(times) or not np.allclose(ledger.times, times):
            raise ConfigurationError("Replica ledgers do not share a time grid")
    return np.vstack([np.asarray(series(ledger), dtype=float) for ledger in ledgers])


def calibrate_splitting_bias(ledgers: Sequence[EnergyLedger]) -> np.ndarray:
    """Mean deterministic energy drift of ``kappa = 0`` runs, subtracted before martingale tests."""
    return np.mean(_stack(ledgers, energy_identity_residual), axis=0)


def _absolute_floor(ledgers: Sequence[EnergyLedger]) -> float:
    scale = max(abs(ledgers[0].kinetic[0]) if ledgers[0].kinetic else 0.0, 1.0)
    return ROUND_OFF * scale


def energy_identity_check(
    ledgers: Sequence[EnergyLedger],
    bias: Optional[np.ndarray] = None,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> SeriesReport:
    residuals = _stack(ledgers, energy_identity_residual)
    require_samples(len(residuals), 2, "Energy identity check")
    if bias is not None:
        residuals = residuals - np.asarray(bias)[np.newaxis]
    mean, _, halfwidth = mean_ci(residuals, ci_level)
    floor = _absolute_floor(ledgers)
    passed = bool(np.all(np.abs(mean) <= halfwidth + floor))
    return SeriesReport(
        "energy_identity",
        np.asarray(ledgers[0].times),
        mean,
        np.zeros_like(mean),
        halfwidth,
        passed,
        {"replicas": len(residuals), "bias_subtracted": bias is not None},
    )


def martingale_qv_check(
    ledgers: Sequence[EnergyLedger],
    kappa: Optional[float] = None,
    total_weight: Optional[float] = None,
    bias: Optional[np.ndarray] = None,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> SeriesReport:
    """``E[M_t^2] <= 24 kappa W int_0^t E[K] ds`` at every recorded time."""
    require_samples(len(ledgers), MIN_QV_REPLICAS, "Martingale quadratic variation check")
    kappa = ledgers[0].kappa if kappa is None else kappa
    total_weight = ledgers[0].total_weight if total_weight is None else total_weight
    residuals = _stack(ledgers, energy_identity_residual)
    if bias is not None:
        residuals = residuals - np.asarray(bias)[np.newaxis]
    squares = residuals**2
    second_moment, stderr, halfwidth = mean_ci(squares, ci_level)
    times = np.asarray(ledgers[0].times)
    mean_kinetic = np.mean(_stack(ledgers, lambda ledger: ledger.kinetic), axis=0)
    if len(times) > 1:
        integral = cumulative_trapezoid(mean_kinetic, times, initial=0.0)
    else:
        integral = np.zeros_like(times)
    bound = 24.0 * kappa * total_weight * integral
    slack = np.divide(stderr, second_moment, out=np.zeros_like(stderr), where=second_moment > 0)
    floor = _absolute_floor(ledgers) ** 2
    passed = bool(np.all(second_moment <= bound * (1.0 + z_value(ci_level) * slack) + floor))
    return SeriesReport(
        "martingale_qv",
        times,
        second_moment,
        bound,
        halfwidth,
        passed,
        {"replicas": len(ledgers), "kappa": kappa, "total_weight": total_weight},
    )


def kinetic_growth_check(ledgers: Sequence[EnergyLedger], ci_level: float = DEFAULT_CI_LEVEL) -> SeriesReport:
    """Noise-only dynamics: ``E K(t) = K(0) + 6 kappa t W``."""
    kinetic = _stack(ledgers, lambda ledger: ledger.kinetic)
    require_samples(len(kinetic), 2, "Kinetic growth check")
    times = np.asarray(ledgers[0].times)
    ledger = ledgers[0]
    target = 6.0 * ledger.kappa * (times - times[0]) * ledger.total_weight
    growth = kinetic - kinetic[:, :1]
    mean, _, halfwidth = mean_ci(growth, ci_level)
    passed = bool(np.all(np.abs(mean - target) <= halfwidth + _absolute_floor(ledgers)))
    return SeriesReport("kinetic_growth", times, mean, target, halfwidth, passed, {"replicas": len(kinetic)})


def velocity_growth_check(
    times: Sequence[float],
    increments: Any,
    kappa: float,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> SeriesReport:
    """Per-sample ``|V_t|^2 - |v_0|^2`` (shape ``(samples, len(times))``) against ``6 kappa t``."""
    data = np.asarray(increments, dtype=float)
    times = np.asarray(times, dtype=float)
    mean, _, halfwidth = mean_ci(data, ci_level)
    target = 6.0 * kappa * times
    passed = bool(np.all(np.abs(mean - target) <= halfwidth + ROUND_OFF))
    return SeriesReport("velocity_growth", times, mean, target, halfwidth, passed, {"samples": len(data)})


def density_lp_norm(grid: DensityGrid, p: float) -> float:
    if p < 1:
        raise ConfigurationError(f"L^p norm needs p >= 1, got {p}")
    values = np.abs(grid.values)
    if np.isinf(p):
        return float(np.max(values))
    return float((np.sum(values**p) * grid.cell_volume) ** (1.0 / p))


@dataclass(eq=False)
class PhaseSpaceGrid:
    """Cell averages of ``f`` on ``T^3 x [-V, V]^3``, array shape ``(n, n, n, m, m, m)``."""

    values: np.ndarray
    velocity_extent: float
    outside_mass: float = 0.0

    def __post_init__(self):
        if self.values.ndim != 6:
            raise ConfigurationError(f"Phase-space grid must be 6-dimensional, got {self.values.shape}")
        if np.any(self.values < 0):
            raise ConfigurationError("Phase-space density must be non-negative")

    @property
    def spatial_resolution(self) -> int:
        return self.values.shape[0]

    @property
    def velocity_resolution(self) -> int:
        return self.values.shape[3]

    @property
    def spatial_cell(self) -> float:
        return 1.0 / self.spatial_resolution**3

    @property
    def velocity_spacing(self) -> float:
        return 2.0 * self.velocity_extent / self.velocity_resolution

    @property
    def velocity_cell(self) -> float:
        return self.velocity_spacing**3

    @property
    def velocity_centers(self) -> np.ndarray:
        m = self.velocity_resolution
        return -self.velocity_extent + (np.arange(m) + 0.5) * self.velocity_spacing

    def speed_squared(self) -> np.ndarray:
        c = self.velocity_centers**2
        return c[:, None, None] + c[None, :, None] + c[None, None, :]

    def spatial_density(self) -> DensityGrid:
        rho = np.sum(self.values, axis=(3, 4, 5)) * self.velocity_cell
        return DensityGrid(self.spatial_resolution, rho)

    def mass(self) -> float:
        return float(np.sum(self.values) * self.spatial_cell * self.velocity_cell)

    def kinetic_energy(self) -> float:
        weighted = np.sum(self.values, axis=(0, 1, 2)) * self.speed_squared()
        return float(np.sum(weighted) * self.spatial_cell * self.velocity_cell)

    def lp_norm(self, p: float) -> float:
        if np.isinf(p):
            return float(np.max(self.values))
        return float((np.sum(self.values**p) * self.spatial_cell * self.velocity_cell) ** (1.0 / p))

    @classmethod
    def from_function(
        cls, function: Callable[..., np.ndarray], spatial: int, velocity: int, extent: float
    ) -> "PhaseSpaceGrid":
        """Sample ``function(x1, x2, x3, v1, v2, v3)`` at cell centers."""
        x = -0.5 + (np.arange(spatial) + 0.5) / spatial
        v = -extent + (np.arange(velocity) + 0.5) * (2.0 * extent / velocity)
        mesh = np.meshgrid(x, x, x, v, v, v, indexing="ij", sparse=True)
        values = np.broadcast_to(function(*mesh), (spatial,) * 3 + (velocity,) * 3)
        return cls(np.array(values, dtype=float), float(extent))


def phase_space_histogram(ensemble, spatial: int = 8, velocity: int = 16, extent: float = 4.0) -> PhaseSpaceGrid:
    """Weighted histogram density of an ensemble; mass outside the velocity box is reported, not binned."""
    if spatial < 1 or velocity < 1 or not extent > 0:
        raise ConfigurationError("Histogram resolutions and velocity extent must be positive")
    sample = np.hstack([ensemble.positions, ensemble.velocities])
    edges = [np.linspace(-0.5, 0.5, spatial + 1)] * 3 + [np.linspace(-extent, extent, velocity + 1)] * 3
    inside = np.all(np.abs(ensemble.velocities) <= extent, axis=1)
    counts, _ = np.histogramdd(sample[inside], bins=edges, weights=ensemble.weights[inside])
    grid = PhaseSpaceGrid(np.zeros_like(counts), float(extent), float(np.sum(ensemble.weights[~inside])))
    grid.values = counts / (grid.spatial_cell * grid.velocity_cell)
    return grid


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    passed: bool
    parameters: Dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else np.inf)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "passed": bool(self.passed),
            "parameters": self.parameters,
        }


def conjugate_exponent(p: float) -> float:
    if p <= 1:
        raise ConfigurationError(f"Exponent must exceed 1, got {p}")
    return 1.0 if np.isinf(p) else p / (p - 1.0)


def interpolation_exponent(p: float) -> float:
    """``r(p) = (2p + 3(p-1)) / (2 + 3(p-1))`` with ``r(inf) = 5/3``."""
    if p <= 1:
        raise ConfigurationError(f"Interpolation exponent needs p > 1, got {p}")
    if np.isinf(p):
        return 5.0 / 3.0
    return (2.0 * p + 3.0 * (p - 1.0)) / (2.0 + 3.0 * (p - 1.0))


def interpolation_constant(p: float) -> float:
    """``1 + (4 pi / 3)^(1/p')``, the unit ball volume raised to ``1/p'``."""
    return 1.0 + (4.0 * np.pi / 3.0) ** (1.0 / conjugate_exponent(p))


def interpolation_bound_check(f_grid: PhaseSpaceGrid, p: float, tolerance: float = 1e-9) -> InequalityReport:
    """``||rho||_r <= C ||f||_p^(2p'/(3+2p')) K(f)^(3/(3+2p'))``."""
    r = interpolation_exponent(p)
    conjugate = conjugate_exponent(p)
    parameters = {"p": p, "r": r, "constant": interpolation_constant(p)}
    if f_grid.mass() == 0:
        return InequalityReport("interpolation", 0.0, 0.0, True, {**parameters, "vacuous": True})
    lhs = density_lp_norm(f_grid.spatial_density(), r)
    rhs = (
        interpolation_constant(p)
        * f_grid.lp_norm(p) ** (2.0 * conjugate / (3.0 + 2.0 * conjugate))
        * f_grid.kinetic_energy() ** (3.0 / (3.0 + 2.0 * conjugate))
    )
    return InequalityReport("interpolation", lhs, rhs, bool(lhs <= rhs * (1.0 + tolerance)), parameters)


def compact_velocity_marginal_check(
    f_grid: PhaseSpaceGrid, lower: Any, upper: Any, p: float, tolerance: float = 1e-12
) -> InequalityReport:
    """``||rho_K||_p <= lambda(K)^(1/p') ||f||_p`` for the velocity cells centered inside the box."""
    if p < 1:
        raise ConfigurationError(f"Exponent must be at least 1, got {p}")
    lower = np.asarray(lower, dtype=float).reshape(3)
    upper = np.asarray(upper, dtype=float).reshape(3)
    if np.any(upper < lower):
        raise ConfigurationError(f"Velocity box is empty: lower {lower.tolist()} upper {upper.tolist()}")
    centers = f_grid.velocity_centers
    masks = [(centers >= lower[axis]) & (centers <= upper[axis]) for axis in range(3)]
    box = masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]
    measure = float(np.count_nonzero(box) * f_grid.velocity_cell)
    rho = np.sum(f_grid.values * box[np.newaxis, np.newaxis, np.newaxis], axis=(3, 4, 5)) * f_grid.velocity_cell
    lhs = density_lp_norm(DensityGrid(f_grid.spatial_resolution, rho), p)
    exponent = 0.0 if p == 1 else 1.0 / conjugate_exponent(p)
    rhs = measure**exponent * f_grid.lp_norm(p)
    return InequalityReport(
        "compact_velocity_marginal",
        lhs,
        rhs,
        bool(lhs <= rhs * (1.0 + tolerance)),
        {"p": p, "measure": measure, "lower": lower.tolist(), "upper": upper.tolist()},
    )
