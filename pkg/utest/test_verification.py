import pytest

from StochasticVlasov.simulation import verification
from StochasticVlasov.simulation.verification import (
    CHECKS,
    MIN_ENERGY_REPLICAS,
    CheckResult,
    VerificationReport,
    check_chi_limit,
    check_covariance_exactness,
    check_covariance_shrinkage,
    check_liouville,
    check_noise_statistics,
    check_trace_identity,
    run_verification,
    verdict,
)
from StochasticVlasov.utils.data_types import CheckStatus


def test_verdict_and_report():
    good = verdict("a", True, "fine", value=1)
    bad = verdict("b", False)
    assert good.status is CheckStatus.PASS and good.details == {"value": 1}
    assert bad.status is CheckStatus.FAIL
    assert not VerificationReport().passed
    report = VerificationReport([good, bad])
    assert not report.passed
    assert report.failed == [bad]
    assert report.to_dict()["checks"][0] == {"name": "a", "status": "PASS", "message": "fine", "details": {"value": 1}}


def test_exact_covariance_checks(small_config):
    for check in (check_covariance_exactness, check_trace_identity, check_covariance_shrinkage):
        result = check(small_config)
        assert result.passed, result.message
    shrinkage = check_covariance_shrinkage(small_config)
    assert [row["N"] for row in shrinkage.details["rows"]] == [1, 2]


def test_exact_checks_fall_back_to_reference_kappa(small_config):
    quiet = small_config.with_physical(kappa=0.0)
    assert check_covariance_exactness(quiet).passed
    assert check_trace_identity(quiet).passed


def test_chi_limit(small_config):
    result = check_chi_limit(small_config)
    assert result.passed, result.details
    assert all(row["monotone"] for row in result.details["rows"])


def test_noise_statistics(small_config):
    result = check_noise_statistics(small_config, draws=20000)
    assert result.passed, result.details
    assert result.details["curl"] <= 1e-10 * result.details["rms"]


def test_liouville(small_config):
    result = check_liouville(small_config)
    assert result.passed, result.message
    assert len(result.details["defects"]) == small_config.statistics.probe_points
    assert result.details["within_bound"]
    assert any(result.details["converging"].values())
    assert "converging when a halving ratio reaches 1.5" in result.message
    assert "met by: none" not in result.message


def test_velocity_growth_on_small_config(small_config):
    result = CHECKS["velocity_growth"](small_config, 1)
    assert result.passed, result.details
    reports = result.details["reports"]
    assert len(reports) == 2
    assert all(report["details"]["replicas"] == small_config.statistics.replicas for report in reports)


def test_energy_identity_runs_at_least_the_minimum_replicas(small_config, mocker):
    assert small_config.statistics.replicas < MIN_ENERGY_REPLICAS
    spy = mocker.spy(verification, "run_replicas")
    result = CHECKS["energy_identity"](small_config, 1)
    assert [len(call.args[2]) for call in spy.call_args_list] == [MIN_ENERGY_REPLICAS, MIN_ENERGY_REPLICAS]
    assert [call.args[0].kappa for call in spy.call_args_list] == [0.0, small_config.kappa]
    assert result.passed, result.message
    assert result.details["identity"]["details"]["replicas"] == MIN_ENERGY_REPLICAS
    assert result.details["identity"]["details"]["bias_subtracted"]


def test_interpolation_on_small_config(small_config):
    result = CHECKS["interpolation"](small_config, 1)
    assert result.passed, result.details
    assert result.message == f"{len(result.details['rows'])} recorded densities"
    assert result.details["rows"][0]["t"] == 0.0
    assert all(len(row["reports"]) == 4 for row in result.details["rows"])


def test_run_selected_checks(small_config):
    report = run_verification(small_config, workers=1, names=["covariance_exactness", "trace_identity", "determinism"])
    assert [check.name for check in report.checks] == ["covariance_exactness", "trace_identity", "determinism"]
    assert report.passed


def test_unknown_check_is_rejected(small_config):
    with pytest.raises(ValueError, match="Unknown check"):
        run_verification(small_config, names=["covariance_exactness", "telepathy"])


def test_raising_check_is_recorded_as_error(small_config, mocker):
    def explode(config, workers):
        raise ZeroDivisionError("division by zero")

    mocker.patch.dict(CHECKS, {"determinism": explode})
    report = run_verification(small_config, names=["trace_identity", "determinism"])
    assert report.checks[0].passed
    error = report.checks[1]
    assert isinstance(error, CheckResult)
    assert error.status is CheckStatus.ERROR
    assert error.message == "ZeroDivisionError: division by zero"
    assert not report.passed
