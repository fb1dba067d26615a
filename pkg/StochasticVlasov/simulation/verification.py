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
"""The invariant suite behind ``stochvlasov verify``.

Every check returns a `CheckResult`; an exception inside a check is recorded
as an ``ERROR`` verdict and the remaining checks still run.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..utils import logger
from ..utils.data_types import BlobShape, CheckStatus, SteppingMode
from ..utils.meta_python import to_plain
from .blob_profile import BlobProfile, blob_chi
from .diagnostics import (
    PhaseSpaceGrid,
    calibrate_splitting_bias,
    compact_velocity_marginal_check,
    energy_identity_check,
    interpolation_bound_check,
    interpolation_exponent,
    kinetic_growth_check,
    martingale_qv_check,
    phase_space_histogram,
)
from .experiment_config import ExperimentConfig, check_budget, estimated_particle_steps
from .initial_state import initial_density
from .noise_model import (
    NoiseSpec,
    blob_noise,
    canonical_coefficients,
    canonical_noise,
    covariance_at,
    covariance_lr_norm,
    increment_cube,
    sample_increment_batch,
)
from .particle_sde import jacobian_probe
from .run_record import successful
from .statistics import z_value
from .streams import StreamPurpose, stream
from .torus_kernel import DensityGrid, spectral_curl, synthesize
from .trajectory import run_replicas, run_trajectory

EXACT_TOLERANCE = 1e-12
CHI_SCALES = (0.2, 0.1, 0.05, 0.025)
CHI_MODES = ((1, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 0))
CHI_FINAL_ERROR = 0.02
NOISE_DRAWS = 100_000
NOISE_LAGS = ((0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.05, 0.2, -0.1))
LIOUVILLE_RATIO = 1.5
MIN_ENERGY_REPLICAS = 64
CURL_TOLERANCE = 1e-10
VELOCITY_BOX = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


@dataclass
class CheckResult:
    name: str
    status: CheckStatus
    message: str = ""
    details: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status is CheckStatus.PASS

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "status": self.status.name,
            "message": self.message,
            "details": to_plain(self.details),
        }


def verdict(name: str, passed: bool, message: str = "", **details) -> CheckResult:
    return CheckResult(name, CheckStatus.PASS if passed else CheckStatus.FAIL, message, details)


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> Dict:
        return {"passed": self.passed, "checks": [check.to_dict() for check in self.checks]}


def _reference_specs(config: ExperimentConfig) -> List[NoiseSpec]:
    kappa = config.kappa if config.kappa > 0 else 0.1
    specs = [canonical_noise(kappa, index, config.noise.mode_cutoff) for index in config.noise.family_indices]
    tau = config.physical.tau or 0.01
    specs.append(blob_noise(tau, 6.0 * kappa / tau, config.noise.ell, config.blob_profile(), config.noise.mode_cutoff))
    return specs


def check_covariance_exactness(config: ExperimentConfig) -> CheckResult:
    deviations = {}
    for spec in _reference_specs(config):
        q0 = covariance_at(spec, np.zeros(3))
        deviations[spec.label] = float(np.max(np.abs(q0 - 2.0 * spec.kappa * np.eye(3))))
    worst = max(deviations.values())
    message = f"max |Q(0) - 2 kappa I| = {worst:.3g}"
    return verdict("covariance_exactness", worst <= EXACT_TOLERANCE, message, deviations=deviations)


def check_trace_identity(config: ExperimentConfig) -> CheckResult:
    deviations = {
        spec.label: abs(np.trace(covariance_at(spec, np.zeros(3))) - 6.0 * spec.kappa)
        for spec in _reference_specs(config)
    }
    worst = max(deviations.values())
    message = f"max |tr Q(0) - 6 kappa| = {worst:.3g}"
    return verdict("trace_identity", worst <= EXACT_TOLERANCE, message, deviations=deviations)


def check_covariance_shrinkage(config: ExperimentConfig) -> CheckResult:
    kappa = config.kappa if config.kappa > 0 else 0.1
    rows = []
    bounded = True
    for index in config.noise.family_indices:
        spec = canonical_noise(kappa, index, config.noise.mode_cutoff)
        l2 = covariance_lr_norm(spec, 2.0)
        bound = 6.0 * kappa * canonical_coefficients(index, config.noise.mode_cutoff).linf_norm
        bounded = bounded and l2 <= bound * (1.0 + EXACT_TOLERANCE)
        rows.append({"N": index, "l2": l2, "l2_bound": bound, "lr_7_4": covariance_lr_norm(spec, 7.0 / 4.0)})
    norms = [row["lr_7_4"] for row in rows]
    decreasing = all(later < earlier for earlier, later in zip(norms, norms[1:]))
    message = f"L2 bounded: {bounded}, L7/4 decreasing: {decreasing}"
    return verdict("covariance_shrinkage", bounded and decreasing, message, rows=rows)


def check_chi_limit(config: ExperimentConfig) -> CheckResult:
    profile = BlobProfile(BlobShape.bump, config.noise.blob_radius, config.noise.blob_mass)
    rows, passed = [], True
    for mode in CHI_MODES:
        errors = [abs(blob_chi(mode, ell, profile) - profile.l1_norm) / profile.l1_norm for ell in CHI_SCALES]
        monotone = all(later < earlier for earlier, later in zip(errors, errors[1:]))
        passed = passed and monotone and errors[-1] < CHI_FINAL_ERROR
        rows.append({"k": list(mode), "relative_errors": errors, "monotone": monotone})
    return verdict("chi_limit", passed, "chi_N(k) tends to ||theta||_1 as ell shrinks", rows=rows)


def check_noise_statistics(config: ExperimentConfig, draws: int = NOISE_DRAWS) -> CheckResult:
    """Sampled increment covariance at three lags and the curl of a synthesized increment."""
    kappa = config.kappa if config.kappa > 0 else 0.1
    spec = canonical_noise(kappa, config.noise.family_indices[0], config.noise.mode_cutoff)
    dt = config.discretization.dt
    rng = stream(config.seed, 0, 0, StreamPurpose.probe)
    base = np.array([0.1, -0.2, 0.3])
    # Bonferroni over the nine entries of every lag
    z = z_value(1.0 - (1.0 - config.statistics.ci_level) / (9 * len(NOISE_LAGS)))
    rows, passed = [], True
    for lag in NOISE_LAGS:
        gaussians = rng.standard_normal((draws, 2 * len(spec.modes)))
        samples = sample_increment_batch(spec, np.vstack([base, base + lag]), dt, gaussians)
        products = samples[:, 0, :, np.newaxis] * samples[:, 1, np.newaxis, :] / dt
        estimate = np.mean(products, axis=0)
        stderr = np.std(products, axis=0, ddof=1) / np.sqrt(draws)
        exact = covariance_at(spec, np.asarray(lag))
        inside = bool(np.all(np.abs(estimate - exact) <= z * stderr + EXACT_TOLERANCE))
        passed = passed and inside
        rows.append({"lag": list(lag), "max_deviation": float(np.max(np.abs(estimate - exact))), "inside": inside})
    cube = increment_cube(spec, rng.standard_normal(2 * len(spec.modes)), dt)
    points = rng.uniform(-0.5, 0.5, size=(256, 3))
    rms = float(np.sqrt(np.mean(synthesize(cube, points).real ** 2)))
    curl = float(np.max(np.abs(synthesize(spectral_curl(cube), points))))
    curl_ok = curl <= CURL_TOLERANCE * rms
    return verdict(
        "noise_statistics",
        passed and curl_ok,
        f"{draws} draws, curl/rms = {curl / rms if rms else 0.0:.3g}",
        lags=rows,
        curl=curl,
        rms=rms,
    )


def check_velocity_growth(config: ExperimentConfig, workers: Optional[int] = None) -> CheckResult:
    """Field-free runs: ``E K(t) = K(0) + 6 kappa t W`` for both noise regimes."""
    free = config.with_physical(self_consistent=False)
    reports = []
    for mode in (SteppingMode.common, SteppingMode.independent):
        records = successful(run_replicas(free, mode, range(free.statistics.replicas), workers))
        reports.append(kinetic_growth_check([record.ledger for record in records], free.statistics.ci_level))
    passed = all(report.passed for report in reports)
    return verdict("velocity_growth", passed, "K(t) - K(0) against 6 kappa t W", reports=[r.to_dict() for r in reports])


def energy_replicas(config: ExperimentConfig) -> int:
    return max(MIN_ENERGY_REPLICAS, config.statistics.replicas)


def check_energy_identity(config: ExperimentConfig, workers: Optional[int] = None) -> CheckResult:
    """Full dynamics after subtracting the ``kappa = 0`` splitting bias; mean residual and QV bound.

    Runs at least ``MIN_ENERGY_REPLICAS`` replicas whatever ``statistics.replicas`` says.
    """
    count = energy_replicas(config)
    if count > config.statistics.replicas:
        logger.info(f"Energy identity raises the replica count from {config.statistics.replicas} to {count}")
    replicas = range(count)
    quiet = config.with_physical(kappa=0.0, tau=None, kT2=None)
    bias = calibrate_splitting_bias(
        [record.ledger for record in successful(run_replicas(quiet, SteppingMode.common, replicas, workers))]
    )
    ledgers = [record.ledger for record in successful(run_replicas(config, SteppingMode.common, replicas, workers))]
    identity = energy_identity_check(ledgers, bias, config.statistics.ci_level)
    quadratic = martingale_qv_check(ledgers, bias=bias, ci_level=config.statistics.ci_level)
    return verdict(
        "energy_identity",
        identity.passed and quadratic.passed,
        f"mean residual inside CI: {identity.passed}, QV below bound: {quadratic.passed}",
        identity=identity.to_dict(),
        quadratic_variation=quadratic.to_dict(),
    )


def liouville_defects(
    config: ExperimentConfig, dt: float, draws_per_step: int, h: Optional[float] = None
) -> np.ndarray:
    statistics = config.statistics
    h = statistics.probe_size if h is None else h
    rng = stream(config.seed, 0, 1, StreamPurpose.probe)
    base_points = np.hstack(
        [rng.uniform(-0.5, 0.5, (statistics.probe_points, 3)), rng.standard_normal((statistics.probe_points, 3))]
    )
    disc = config.discretization
    background = DensityGrid.from_function(initial_density(disc.amplitude, disc.mass), disc.grid)
    spec = config.noise_spec()
    cfg = config.step_config(dt)
    return np.array(
        [
            abs(jacobian_probe(cfg, spec, config.seed, point, h, disc.horizon, draws_per_step, background) - 1.0)
            for point in base_points
        ]
    )


def check_liouville(config: ExperimentConfig) -> CheckResult:
    """Probe defects within ``10 (dt + h^2)``; they must shrink when halving ``dt`` or the probe size.

    The splitting is volume preserving step by step, so the remaining defect
    may be pure finite-difference error, which only the probe size controls.
    """
    dt, h = config.discretization.dt, config.statistics.probe_size
    coarse = liouville_defects(config, dt, 2)
    fine = liouville_defects(config, dt / 2, 1)
    halved = liouville_defects(config, dt / 2, 1, h / 2)
    bound, floor = 10.0 * (dt + h**2), 10.0 * h**2
    median_coarse, median_fine = float(np.median(coarse)), float(np.median(fine))
    ratio = median_coarse / median_fine if median_fine > 0 else float("inf")
    median_halved = float(np.median(halved))
    probe_ratio = median_fine / median_halved if median_halved > 0 else float("inf")
    within = bool(np.all(coarse <= bound))
    converging = {
        "dt_ratio": ratio >= LIOUVILLE_RATIO,
        "h_ratio": probe_ratio >= LIOUVILLE_RATIO,
        "fine_floor": bool(np.all(fine <= floor)),
    }
    accepted_by = [name for name, ok in converging.items() if ok]
    return verdict(
        "liouville",
        within and bool(accepted_by),
        f"max defect {float(np.max(coarse)):.3g} (bound {bound:.3g}), "
        f"halving ratios dt {ratio:.3g} h {probe_ratio:.3g}; "
        f"converging when a halving ratio reaches {LIOUVILLE_RATIO} or every refined defect is below {floor:.3g}, "
        f"met by: {', '.join(accepted_by) or 'none'}",
        defects=coarse,
        refined_defects=fine,
        probe_defects=halved,
        ratio=ratio,
        probe_ratio=probe_ratio,
        within_bound=within,
        converging=converging,
    )


def check_interpolation(config: ExperimentConfig) -> CheckResult:
    """Phase-space histograms of a reference trajectory at every recorded time."""
    statistics = config.statistics
    grids: List[Tuple[float, PhaseSpaceGrid]] = []

    def snapshot(t, ensemble):
        grid = phase_space_histogram(
            ensemble, statistics.histogram_spatial, statistics.histogram_velocity, statistics.histogram_extent
        )
        grids.append((t, grid))

    run_trajectory(config, SteppingMode.common, 0, on_record=snapshot)
    rows, passed = [], abs(interpolation_exponent(2.0) - 7.0 / 5.0) < EXACT_TOLERANCE
    for t, grid in grids:
        reports = [
            interpolation_bound_check(grid, 2.0),
            interpolation_bound_check(grid, np.inf),
            compact_velocity_marginal_check(grid, *VELOCITY_BOX, 2.0),
            compact_velocity_marginal_check(grid, *VELOCITY_BOX, 1.0),
        ]
        passed = passed and all(report.passed for report in reports)
        rows.append({"t": t, "reports": [report.to_dict() for report in reports]})
    return verdict("interpolation", passed, f"{len(grids)} recorded densities", rows=rows)


def check_determinism(config: ExperimentConfig) -> CheckResult:
    disc = config.discretization
    short = config.with_discretization(horizon=disc.dt * min(config.steps, disc.record_every))
    first = run_trajectory(short, SteppingMode.common, 0).to_dict()
    second = run_trajectory(short, SteppingMode.common, 0).to_dict()
    return verdict("determinism", first == second, "repeated replica 0 runs are identical")


Check = Callable[[ExperimentConfig, Optional[int]], CheckResult]

CHECKS: Dict[str, Check] = {
    "covariance_exactness": lambda config, workers: check_covariance_exactness(config),
    "trace_identity": lambda config, workers: check_trace_identity(config),
    "covariance_shrinkage": lambda config, workers: check_covariance_shrinkage(config),
    "chi_limit": lambda config, workers: check_chi_limit(config),
    "noise_statistics": lambda config, workers: check_noise_statistics(config),
    "velocity_growth": check_velocity_growth,
    "energy_identity": check_energy_identity,
    "liouville": lambda config, workers: check_liouville(config),
    "interpolation": lambda config, workers: check_interpolation(config),
    "determinism": lambda config, workers: check_determinism(config),
}


def run_verification(
    config: ExperimentConfig, workers: Optional[int] = None, names: Optional[Sequence[str]] = None
) -> VerificationReport:
    selected = list(CHECKS) if not names else list(names)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown check(s) {unknown}; available: {', '.join(CHECKS)}")
    energy_extra = max(0, energy_replicas(config) - config.statistics.replicas) if "energy_identity" in selected else 0
    extra = 2.0 * (1 + energy_extra) * config.discretization.particles * config.steps
    check_budget(config, estimated_particle_steps(config, rows=4) + extra)
    report = VerificationReport()
    for name in selected:
        try:
            result = CHECKS[name](config, workers)
        except Exception as error:
            logger.error(f"Check '{name}' raised {type(error).__name__}: {error}")
            result = CheckResult(name, CheckStatus.ERROR, f"{type(error).__name__}: {error}")
        logger.info(f"Check {name}: {result.status.name} {result.message}")
        report.checks.append(result)
    return report
