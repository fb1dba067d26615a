import numpy as np
import pytest
from scipy import stats  # type: ignore

from StochasticVlasov.errors import BudgetExceededError, ConfigurationError, StatisticalError
from StochasticVlasov.simulation.diagnostics import EnergyLedger, Observable, observable_value
from StochasticVlasov.simulation.initial_state import sample_initial_ensemble
from StochasticVlasov.simulation.particle_sde import StepConfig, step_independent_noise
from StochasticVlasov.simulation.run_record import RunRecord
from StochasticVlasov.simulation.scaling_experiment import (
    MIN_DT_ORDER,
    ConvergenceRow,
    ConvergenceTable,
    SweepPlan,
    _dt_orders,
    check_covariance_hygiene,
    heat_kernel_observable,
    limit_self_convergence,
    martingale_trend,
    martingale_variance,
    noise_floor,
    observable_error,
    observable_scales,
    run_sweep,
)
from StochasticVlasov.utils.data_types import ObservableKind, SteppingMode


def make_row(index, lr_norm, err=0.1, err_ci=0.01, mart_var=1.0):
    return ConvergenceRow(index, f"canonical N={index}", lr_norm, lr_norm, err, err_ci, mart_var, 0.0, 8, 0, False)


def make_record(replica_id, mode, values):
    record = RunRecord("hash", replica_id, mode, "", EnergyLedger(0.0, 1.0))
    for t, value in enumerate(values):
        record.append(float(t), 1.0, 0.0, {"a": value})
    return record


def test_heat_kernel_at_time_zero_matches_initial_state():
    assert heat_kernel_observable(Observable((0, 0, 0), width=float("inf")), 0.0, 0.1) == pytest.approx(1.0)
    observable = Observable((1, 0, 0), width=float("inf"))
    assert heat_kernel_observable(observable, 0.0, 0.1, amplitude=0.3) == pytest.approx(0.15)
    assert heat_kernel_observable(Observable((1, 1, 0)), 0.3, 0.1) == 0.0
    assert heat_kernel_observable(Observable((1, 0, 0), kind=ObservableKind.sin), 0.3, 0.1) == pytest.approx(0.0)


def test_heat_kernel_free_streaming_decay():
    t, theta = 0.4, 1.0
    expected = 0.05 * np.exp(-2 * np.pi**2 * theta * t**2)
    assert heat_kernel_observable(Observable((1, 0, 0), width=float("inf")), t, 0.0) == pytest.approx(expected)


def test_heat_kernel_matches_monte_carlo():
    rng = np.random.default_rng(2024)
    kappa, dt, steps = 0.1, 0.01, 20
    ensemble = sample_initial_ensemble(50000, rng, 0.5, 1.0, 1.0)
    cfg = StepConfig(dt=dt, magnetic=0.0, self_consistent=False)
    for _ in range(steps):
        ensemble = step_independent_noise(ensemble, kappa, cfg, rng=rng)
    t = steps * dt
    window = Observable((0, 0, 0), center=(1.0, 0.0, 0.0), width=1.0)
    spatial = Observable((1, 0, 0), width=float("inf"))
    assert observable_value(ensemble, window) == pytest.approx(
        heat_kernel_observable(window, t, kappa, amplitude=0.5), abs=0.01
    )
    assert observable_value(ensemble, spatial) == pytest.approx(
        heat_kernel_observable(spatial, t, kappa, amplitude=0.5), abs=0.015
    )


def test_convergence_table_verdicts():
    table = ConvergenceTable([make_row(1, 0.3, err=0.2), make_row(2, 0.2, err=0.21), make_row(3, 0.1, err=0.05)])
    assert table.non_increasing()
    assert table.headline()
    table.rows.append(make_row(4, 0.05, err=0.2))
    assert not table.non_increasing()
    assert not table.headline()
    assert not ConvergenceTable([make_row(1, 0.3)]).headline()
    data = table.to_dict()
    assert data["noise_floor"] is None
    assert data["rows"][0]["label"] == "canonical N=1"
    assert len(table.csv_rows()[0]) == 11


def test_martingale_trend_fits_log_log_slope():
    norms = [0.3, 0.2, 0.1]
    table = ConvergenceTable([make_row(i, n, mart_var=2.0 * n**2) for i, n in enumerate(norms, 1)])
    report = martingale_trend(table)
    assert report.slope == pytest.approx(2.0)
    assert report.intercept == pytest.approx(np.log(2.0))
    assert report.passed
    assert not report.degenerate
    falling = ConvergenceTable([make_row(i, n, mart_var=1.0 / n) for i, n in enumerate(norms, 1)])
    assert not martingale_trend(falling).passed


def test_martingale_trend_interval_uses_residual_degrees_of_freedom():
    norms = [0.4, 0.3, 0.2, 0.1]
    variances = [0.5, 0.2, 0.15, 0.02]
    table = ConvergenceTable([make_row(i, n, mart_var=v) for i, (n, v) in enumerate(zip(norms, variances), 1)])
    report = martingale_trend(table, ci_level=0.95)
    fit = stats.linregress(np.log(norms), np.log(variances))
    assert report.stderr == pytest.approx(fit.stderr)
    assert report.ci == pytest.approx(stats.t.ppf(0.975, 2) * fit.stderr)
    assert report.ci > stats.norm.ppf(0.975) * fit.stderr
    assert report.passed is bool(fit.slope - report.ci > 0)


def test_martingale_trend_degenerate_tables():
    with pytest.raises(StatisticalError):
        martingale_trend(ConvergenceTable([make_row(1, 0.3), make_row(2, 0.2)]))
    zero = martingale_trend(ConvergenceTable([make_row(1, 0.3), make_row(2, 0.2), make_row(3, 0.1, mart_var=0.0)]))
    assert zero.degenerate and not zero.passed
    flat = martingale_trend(ConvergenceTable([make_row(i, 0.2) for i in (1, 2, 3)]))
    assert flat.degenerate
    assert "identical covariance norms" in flat.reason


def test_observable_error_pairs_replicas():
    common = [make_record(r, SteppingMode.common, [1.0, 1.1]) for r in (2, 0, 1)]
    limit = [make_record(r, SteppingMode.independent, [1.0, 1.0]) for r in (0, 1, 2)]
    err, err_ci = observable_error(common, limit, ["a"], np.array([0.5]), 0.95)
    assert err == pytest.approx(0.1)
    assert err_ci == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(StatisticalError):
        observable_error(common[:1], limit, ["a"], np.array([0.5]), 0.95)


def test_martingale_variance_skips_failures():
    records = [make_record(r, SteppingMode.common, [0.0, float(r + 1)]) for r in range(5)]
    records[4].status = "failed"
    variance, ci = martingale_variance(records, ["a"], 0.95)
    assert variance == pytest.approx(np.var([1.0, 2.0, 3.0, 4.0], ddof=1))
    assert ci > 0


def test_sweep_plan_and_hygiene(small_config):
    plan = SweepPlan.from_config(small_config)
    assert plan.family_indices == (1, 2)
    norms = check_covariance_hygiene(plan)
    assert norms[0] > norms[1] > 0
    assert plan.particle_steps() == 64 * 5 * 4 * 3
    with pytest.raises(ConfigurationError):
        SweepPlan.from_config(small_config.with_physical(kappa=0.0))


def test_observable_scales_are_positive(small_config):
    scales = observable_scales(small_config)
    assert scales.shape == (2,)
    assert np.all(scales > 0)


def test_sweep_checks_the_budget_first(small_config, mocker):
    runner = mocker.patch("StochasticVlasov.simulation.scaling_experiment.run_replicas")
    plan = SweepPlan.from_config(small_config)
    plan.config = small_config.with_discretization(particles=10**9)
    with pytest.raises(BudgetExceededError):
        run_sweep(plan)
    runner.assert_not_called()


def test_small_sweep(small_config):
    batches = []
    table = run_sweep(
        SweepPlan.from_config(small_config),
        workers=1,
        on_records=lambda label, records: batches.append((label, len(records))),
    )
    assert batches == [("limit", 4), ("N1", 4), ("N2", 4)]
    assert [row.label for row in table.rows] == ["canonical N=1", "canonical N=2"]
    assert all(row.replicas == 4 and row.failures == 0 and not row.degraded for row in table.rows)
    assert all(np.isfinite(row.err) and row.err_ci >= 0 for row in table.rows)
    assert table.rows[0].lr_norm > table.rows[1].lr_norm


def test_noise_floor_without_noise_is_zero(small_config):
    err, err_ci = noise_floor(small_config, workers=1)
    assert err == 0.0
    assert err_ci == 0.0


def level_records(values):
    return [make_record(r, SteppingMode.independent, [0.0, value]) for r, value in enumerate(values)]


def test_dt_orders_from_three_refinements(small_config, mocker):
    levels = [level_records([1.4, 1.4]), level_records([1.2, 1.2]), level_records([1.1, 1.1])]
    runner = mocker.patch("StochasticVlasov.simulation.scaling_experiment._run", side_effect=levels)
    orders, roundoff = _dt_orders(small_config, ["a"], np.array([1.0]), 1)
    assert orders["a"] == pytest.approx(1.0)
    assert not roundoff
    refined = [call.args[0].discretization.dt for call in runner.call_args_list]
    assert refined == pytest.approx([0.01, 0.005, 0.0025])
    assert [call.kwargs["draws_per_step"] for call in runner.call_args_list] == [4, 2, 1]


def test_dt_orders_report_roundoff_when_levels_agree(small_config, mocker):
    mocker.patch(
        "StochasticVlasov.simulation.scaling_experiment._run",
        side_effect=[level_records([0.5, 0.5]) for _ in range(3)],
    )
    orders, roundoff = _dt_orders(small_config, ["a"], np.array([1.0]), 1)
    assert orders == {}
    assert roundoff


def test_limit_self_convergence_on_small_config(small_config):
    report = limit_self_convergence(small_config, workers=1)
    names = [obs.name for obs in small_config.statistics.observables]
    assert set(report.dt_orders) <= set(names)
    assert report.dt_passed == (report.roundoff or report.median_order >= MIN_DT_ORDER)
    assert all(ratio > 0 for ratio in report.width_ratios.values())
    assert [row["observable"] for row in report.heat_kernel] == names
    data = report.to_dict()
    assert data["passed"] == report.passed
    assert set(data) >= {"dt_orders", "median_width_ratio", "heat_kernel_passed", "roundoff"}


def test_limit_self_convergence_checks_the_budget_first(small_config, mocker):
    runner = mocker.patch("StochasticVlasov.simulation.scaling_experiment.run_replicas")
    with pytest.raises(BudgetExceededError):
        limit_self_convergence(small_config.with_discretization(particles=10**9), workers=1)
    runner.assert_not_called()
