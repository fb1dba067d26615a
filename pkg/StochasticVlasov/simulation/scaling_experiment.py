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
"""Sweep over a covariance-shrinking noise family against the independent-noise limit.

Each row compares common-noise replicas of family member ``N`` with the
independent-noise replicas of the same configuration. Replica ``r`` of both
runs starts from the same initial ensemble, so differences are paired.
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats  # type: ignore

from ..errors import ConfigurationError, StatisticalError
from ..utils import logger
from ..utils.data_types import ObservableKind, SteppingMode
from .diagnostics import Observable
from .experiment_config import ExperimentConfig, check_budget, estimated_particle_steps
from .initial_state import sample_initial_ensemble
from .noise_model import NoiseSpec, covariance_at, covariance_lr_norm
from .run_record import RunRecord, failed_fraction
from .statistics import mean_ci, require_samples, t_value, variance_ci
from .streams import StreamPurpose, stream
from .trajectory import run_replicas

TREND_NORM = 7.0 / 4.0
HYGIENE_TOLERANCE = 1e-12
DEGRADED_FRACTION = 0.1
MIN_TREND_ROWS = 3
MIN_DT_ORDER = 0.8
WIDTH_RATIO_TOLERANCE = 0.2


@dataclass
class SweepPlan:
    config: ExperimentConfig
    family_indices: Tuple[int, ...]
    specs: List[NoiseSpec] = field(default_factory=list)

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "SweepPlan":
        if config.kappa <= 0:
            raise ConfigurationError("A sweep needs kappa > 0; use noise_floor for the kappa = 0 calibration")
        indices = tuple(config.noise.family_indices)
        specs = [config.noise_spec(index) for index in indices]
        return cls(config, indices, specs)  # type: ignore

    @property
    def observables(self) -> Tuple[Observable, ...]:
        return self.config.statistics.observables

    @property
    def replicas(self) -> int:
        return self.config.statistics.replicas

    def particle_steps(self) -> float:
        return estimated_particle_steps(self.config, rows=len(self.family_indices) + 1)

    def lr_norms(self) -> List[float]:
        return [covariance_lr_norm(spec, TREND_NORM) for spec in self.specs]


def check_covariance_hygiene(plan: SweepPlan) -> List[float]:
    """Abort unless every member has ``Q(0) = 2 kappa I`` and the 7/4 norms strictly decrease."""
    kappa = plan.config.kappa
    target = 2.0 * kappa * np.eye(3)
    for index, spec in zip(plan.family_indices, plan.specs):
        deviation = float(np.max(np.abs(covariance_at(spec, np.zeros(3)) - target)))
        if deviation > HYGIENE_TOLERANCE * max(1.0, kappa):
            raise ConfigurationError(
                f"Covariance hygiene: Q_N(0) deviates from 2 kappa I by {deviation:g} at N={index}"
            )
        if abs(spec.trace - 6.0 * kappa) > HYGIENE_TOLERANCE * max(1.0, kappa):
            raise ConfigurationError(f"Covariance hygiene: trace {spec.trace} differs from 6 kappa at N={index}")
    norms = plan.lr_norms()
    if any(later >= earlier for earlier, later in zip(norms, norms[1:])):
        raise ConfigurationError(f"Covariance hygiene: L^7/4 norms are not strictly decreasing: {norms}")
    return norms


def observable_scales(config: ExperimentConfig) -> np.ndarray:
    """``<f0, |phi|>`` of each observable on the replica-0 initial ensemble."""
    disc = config.discretization
    ensemble = sample_initial_ensemble(
        disc.particles,
        stream(config.seed, 0, 0, StreamPurpose.initial_state),
        disc.amplitude,
        disc.temperature,
        disc.mass,
    )
    scales = [
        np.sum(ensemble.weights * np.abs(obs.evaluate(ensemble.positions, ensemble.velocities)))
        for obs in config.statistics.observables
    ]
    return np.maximum(np.asarray(scales), np.finfo(float).tiny)


@dataclass
class ConvergenceRow:
    family_index: int
    label: str
    lr_norm: float
    l2_norm: float
    err: float
    err_ci: float
    mart_var: float
    mart_var_ci: float
    replicas: int
    failures: int
    degraded: bool

    def to_dict(self) -> Dict:
        return asdict(self)


ROW_HEADER = [
    "N",
    "label",
    "lr_norm_7_4",
    "l2_norm",
    "err",
    "err_ci",
    "mart_var",
    "mart_var_ci",
    "replicas",
    "failures",
    "degraded",
]


@dataclass
class ConvergenceTable:
    rows: List[ConvergenceRow] = field(default_factory=list)
    observables: List[str] = field(default_factory=list)
    noise_floor: Optional[Tuple[float, float]] = None
    ci_level: float = 0.9973

    def csv_rows(self) -> List[List]:
        return [
            [
                row.family_index,
                row.label,
                row.lr_norm,
                row.l2_norm,
                row.err,
                row.err_ci,
                row.mart_var,
                row.mart_var_ci,
                row.replicas,
                row.failures,
                row.degraded,
            ]
            for row in self.rows
        ]

    def non_increasing(self) -> bool:
        """``err`` does not increase between consecutive rows beyond the combined intervals."""
        return all(
            later.err <= earlier.err + earlier.err_ci + later.err_ci
            for earlier, later in zip(self.rows, self.rows[1:])
        )

    def headline(self) -> bool:
        """Last row below the first row with non-overlapping intervals."""
        if len(self.rows) < 2:
            return False
        first, last = self.rows[0], self.rows[-1]
        return last.err + last.err_ci < first.err - first.err_ci

    def to_dict(self) -> Dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "observables": list(self.observables),
            "noise_floor": None if self.noise_floor is None else list(self.noise_floor),
            "ci_level": self.ci_level,
            "non_increasing": self.non_increasing(),
            "headline": self.headline(),
        }


def _paired(common: Sequence[RunRecord], limit: Sequence[RunRecord]) -> List[Tuple[RunRecord, RunRecord]]:
    by_id = {record.replica_id: record for record in limit if not record.failed}
    return [(record, by_id[record.replica_id]) for record in common if not record.failed and record.replica_id in by_id]


def observable_error(
    common: Sequence[RunRecord],
    limit: Sequence[RunRecord],
    names: Sequence[str],
    scales: np.ndarray,
    ci_level: float,
) -> Tuple[float, float]:
    """Mean over observables and recorded times of the normalized paired difference of means."""
    pairs = _paired(common, limit)
    require_samples(len(pairs), 2, "Observable error")
    differences = np.stack(
        [a.observable_matrix(names) - b.observable_matrix(names) for a, b in pairs]
    ) / scales[np.newaxis, :, np.newaxis]
    mean, _, halfwidth = mean_ci(differences, ci_level)
    return float(np.mean(np.abs(mean))), float(np.mean(halfwidth))


def martingale_variance(records: Sequence[RunRecord], names: Sequence[str], ci_level: float) -> Tuple[float, float]:
    """Replica variance of ``<f_T, phi>`` averaged over observables."""
    good = [record for record in records if not record.failed]
    estimates = [variance_ci([record.observables[name][-1] for record in good], ci_level) for name in names]
    return float(np.mean([e.mean for e in estimates])), float(np.mean([e.halfwidth for e in estimates]))


def _run(config: ExperimentConfig, mode: SteppingMode, workers: Optional[int], **kwargs) -> List[RunRecord]:
    return run_replicas(config, mode, range(config.statistics.replicas), workers, **kwargs)


def run_sweep(
    plan: SweepPlan,
    workers: Optional[int] = None,
    limit_records: Optional[List[RunRecord]] = None,
    on_records=None,
) -> ConvergenceTable:
    """Compare each family member with the independent-noise limit.

    The budget is checked before anything runs. ``on_records(label, records)``
    receives every finished batch of run records.
    """
    config = plan.config
    check_budget(config, plan.particle_steps())
    require_samples(plan.replicas, 4, "Sweep")
    norms = check_covariance_hygiene(plan)
    names = [obs.name for obs in plan.observables]
    scales = observable_scales(config)
    ci_level = config.statistics.ci_level
    if limit_records is None:
        limit_records = _run(config, SteppingMode.independent, workers)
        if on_records is not None:
            on_records("limit", limit_records)
    table = ConvergenceTable(observables=names, ci_level=ci_level)
    for index, spec, lr_norm in zip(plan.family_indices, plan.specs, norms):
        logger.info(f"Sweep row N={index} ({spec.label}), ||Q_N||_7/4 = {lr_norm:.6g}")
        records = _run(config, SteppingMode.common, workers, noise=spec, family_index=index)
        if on_records is not None:
            on_records(f"N{index}", records)
        fraction = failed_fraction(records)
        err, err_ci = observable_error(records, limit_records, names, scales, ci_level)
        mart_var, mart_var_ci = martingale_variance(records, names, ci_level)
        table.rows.append(
            ConvergenceRow(
                family_index=index,
                label=spec.label,
                lr_norm=lr_norm,
                l2_norm=covariance_lr_norm(spec, 2.0),
                err=err,
                err_ci=err_ci,
                mart_var=mart_var,
                mart_var_ci=mart_var_ci,
                replicas=len(records),
                failures=sum(record.failed for record in records),
                degraded=fraction > DEGRADED_FRACTION,
            )
        )
        if fraction > DEGRADED_FRACTION:
            logger.warn(f"Sweep row N={index} degraded: {fraction:.0%} of replicas failed")
    return table


def noise_floor(config: ExperimentConfig, workers: Optional[int] = None) -> Tuple[float, float]:
    """``err`` between noiseless common and ``kappa = 0`` independent runs: the floor of the sweep."""
    check_budget(config, estimated_particle_steps(config, rows=2))
    quiet = config.with_physical(kappa=0.0, tau=None, kT2=None)
    names = [obs.name for obs in config.statistics.observables]
    common = _run(quiet, SteppingMode.common, workers, noise=None)
    limit = _run(quiet, SteppingMode.independent, workers)
    return observable_error(common, limit, names, observable_scales(config), config.statistics.ci_level)


@dataclass
class TrendReport:
    slope: float
    intercept: float
    stderr: float
    ci: float
    rows: int
    passed: bool
    degenerate: bool = False
    reason: str = ""

    def to_dict(self) -> Dict:
        return asdict(self)


def martingale_trend(table: ConvergenceTable, ci_level: Optional[float] = None) -> TrendReport:
    """Fit ``log mart_var`` against ``log ||Q_N||_7/4``; passes iff the slope is positive beyond its interval."""
    if len(table.rows) < MIN_TREND_ROWS:
        raise StatisticalError(f"Martingale trend needs at least {MIN_TREND_ROWS} rows, got {len(table.rows)}")
    level = table.ci_level if ci_level is None else ci_level
    norms = np.array([row.lr_norm for row in table.rows])
    variances = np.array([row.mart_var for row in table.rows])
    nan = float("nan")
    if np.any(norms <= 0) or np.any(variances <= 0):
        return TrendReport(
            nan, nan, nan, nan, len(norms), False, True, "non-positive entries cannot be log-transformed"
        )
    x, y = np.log(norms), np.log(variances)
    if np.ptp(x) == 0:
        return TrendReport(nan, nan, nan, nan, len(norms), False, True, "identical covariance norms: slope undefined")
    fit = stats.linregress(x, y)
    # residual degrees of freedom of a two-parameter fit
    ci = t_value(level, len(norms) - 2) * float(fit.stderr)
    slope = float(fit.slope)
    return TrendReport(slope, float(fit.intercept), float(fit.stderr), ci, len(norms), bool(slope - ci > 0))


def heat_kernel_observable(
    observable: Observable,
    t: float,
    kappa: float,
    amplitude: float = 0.1,
    temperature: float = 1.0,
    mass: float = 1.0,
) -> float:
    """``<f_t, phi>`` for free streaming with velocity diffusion from the default ``f0``.

    Per axis ``(D, V) = (X - X0, V)`` is centered Gaussian with
    ``Var V = theta + 2 kappa t``, ``Var D = theta t^2 + 2 kappa t^3 / 3`` and
    ``Cov = theta t + kappa t^2``.
    """
    mode = np.asarray(observable.mode)
    if not np.any(mode):
        spatial = 1.0
    elif abs(mode[0]) == 1 and not np.any(mode[1:]):
        spatial = 0.5 * amplitude
    else:
        return 0.0
    var_v = temperature + 2.0 * kappa * t
    var_d = temperature * t**2 + 2.0 * kappa * t**3 / 3.0
    cov = temperature * t + kappa * t**2
    slope = cov / var_v
    conditional = max(var_d - cov * slope, 0.0)
    total = complex(mass * spatial)
    for axis in range(3):
        alpha = 2.0 * np.pi * mode[axis]
        beta = alpha * slope
        factor = np.exp(-0.5 * alpha**2 * conditional)
        if np.isinf(observable.width):
            factor *= np.exp(-0.5 * beta**2 * var_v)
        else:
            s2, c = observable.width**2, observable.center[axis]
            mean = c * var_v / (s2 + var_v)
            spread = var_v * s2 / (s2 + var_v)
            factor *= np.sqrt(s2 / (s2 + var_v)) * np.exp(-(c**2) / (2.0 * (s2 + var_v)))
            factor *= np.exp(1j * beta * mean - 0.5 * beta**2 * spread)
        total *= factor
    return float(total.real if observable.kind is ObservableKind.cos else total.imag)


@dataclass
class SelfConvergenceReport:
    dt_orders: Dict[str, float]
    median_order: float
    dt_passed: bool
    width_ratios: Dict[str, float]
    median_width_ratio: float
    particles_passed: bool
    heat_kernel: List[Dict] = field(default_factory=list)
    heat_kernel_passed: bool = True
    roundoff: bool = False

    @property
    def passed(self) -> bool:
        return self.dt_passed and self.particles_passed and self.heat_kernel_passed

    def to_dict(self) -> Dict:
        return {**asdict(self), "passed": self.passed}


def _final_values(records: Sequence[RunRecord], names: Sequence[str]) -> np.ndarray:
    return np.array([[record.observables[name][-1] for name in names] for record in records if not record.failed])


def _dt_orders(config: ExperimentConfig, names: Sequence[str], scales: np.ndarray, workers: Optional[int]):
    dt = config.discretization.dt
    levels = []
    for factor in (1, 2, 4):
        refined = config.with_discretization(dt=dt / factor, record_every=config.discretization.record_every * factor)
        records = _run(refined, SteppingMode.independent, workers, draws_per_step=4 // factor)
        levels.append(_final_values(records, names))
    coarse, middle, fine = (np.mean(level, axis=0) / scales for level in levels)
    first, second = np.abs(coarse - middle), np.abs(middle - fine)
    floor = 1e-12
    orders = {}
    for index, name in enumerate(names):
        if first[index] > floor and second[index] > floor:
            orders[name] = float(np.log2(first[index] / second[index]))
    return orders, not orders


def _width_ratios(config: ExperimentConfig, names: Sequence[str], workers: Optional[int]) -> Dict[str, float]:
    particles = config.discretization.particles
    widths = []
    for factor in (1, 4):
        resized = config.with_discretization(particles=particles * factor)
        values = _final_values(_run(resized, SteppingMode.independent, workers), names)
        widths.append(mean_ci(values, config.statistics.ci_level)[2])
    small, large = widths
    return {name: float(small[i] / large[i]) for i, name in enumerate(names) if large[i] > 0 and small[i] > 0}


def heat_kernel_check(config: ExperimentConfig, workers: Optional[int] = None) -> Tuple[List[Dict], bool]:
    """Field-free, ``B = 0`` independent runs against `heat_kernel_observable` at the horizon."""
    free = config.with_physical(self_consistent=False, magnetic=0.0)
    names = [obs.name for obs in config.statistics.observables]
    values = _final_values(_run(free, SteppingMode.independent, workers), names)
    mean, _, halfwidth = mean_ci(values, config.statistics.ci_level)
    disc = config.discretization
    rows, passed = [], True
    for index, obs in enumerate(config.statistics.observables):
        exact = heat_kernel_observable(obs, disc.horizon, config.kappa, disc.amplitude, disc.temperature, disc.mass)
        ok = bool(abs(mean[index] - exact) <= halfwidth[index] + 1e-12)
        passed = passed and ok
        rows.append(
            {
                "observable": obs.name,
                "mean": float(mean[index]),
                "ci": float(halfwidth[index]),
                "exact": exact,
                "passed": ok,
            }
        )
    return rows, passed


def limit_self_convergence(config: ExperimentConfig, workers: Optional[int] = None) -> SelfConvergenceReport:
    """Weak order in ``dt`` from ``(dt, dt/2, dt/4)`` on one Brownian path per replica, and ``P^-1/2`` scaling.

    ``4P`` particles must shrink the interval of the horizon observables by a
    factor of 2 within 20 percent.
    """
    disc = config.discretization
    cost = disc.particles * config.steps * config.statistics.replicas * (1 + 2 + 4 + 1 + 4 + 1)
    check_budget(config, cost)
    require_samples(config.statistics.replicas, 2, "Limit self-convergence")
    names = [obs.name for obs in config.statistics.observables]
    scales = observable_scales(config)
    orders, roundoff = _dt_orders(config, names, scales, workers)
    median_order = float(np.median(list(orders.values()))) if orders else float("inf")
    ratios = _width_ratios(config, names, workers)
    median_ratio = float(np.median(list(ratios.values()))) if ratios else float("nan")
    particles_passed = bool(abs(median_ratio - 2.0) <= 2.0 * WIDTH_RATIO_TOLERANCE) if ratios else True
    heat_rows, heat_passed = heat_kernel_check(config, workers)
    report = SelfConvergenceReport(
        dt_orders=orders,
        median_order=median_order,
        dt_passed=roundoff or median_order >= MIN_DT_ORDER,
        width_ratios=ratios,
        median_width_ratio=median_ratio,
        particles_passed=particles_passed,
        heat_kernel=heat_rows,
        heat_kernel_passed=heat_passed,
        roundoff=roundoff,
    )
    logger.info(f"Limit self-convergence: median dt order {median_order:.3g}, P width ratio {median_ratio:.3g}")
    return report
