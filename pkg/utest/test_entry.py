import json

import pytest
from approvaltests.approvals import verify_all  # type: ignore

from StochasticVlasov.entry import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    LOG_FILE,
    _with_replica_count,
    main,
    parse_replicas,
)
from StochasticVlasov.errors import ConfigurationError
from StochasticVlasov.simulation.experiment_config import OUTPUT_DIR_ENV
from StochasticVlasov.simulation.scaling_experiment import ConvergenceRow, ConvergenceTable

from .conftest import small_config_dict


def test_parse_replicas():
    results = [
        parse_replicas("0..3"),
        parse_replicas("5"),
        parse_replicas(" 2 .. 4 "),
        parse_replicas(None),
    ]
    verify_all("Replicas", results)


@pytest.mark.parametrize("text", ["3..1", "a..b", "-1..2", "1..2..3"])
def test_invalid_replica_ranges(text):
    with pytest.raises(ConfigurationError):
        parse_replicas(text)


def test_replica_range_sets_the_count(small_config):
    config = _with_replica_count(small_config, (2, 5))
    assert config.statistics.replicas == 4
    assert config.provenance["statistics.replicas"] == "override"
    assert _with_replica_count(small_config, None) is small_config


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config_dict()), encoding="utf-8")
    return path


def test_missing_config_writes_error_report(tmp_path):
    out = tmp_path / "out"
    status = main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(out)])
    assert status == EXIT_CONFIG_ERROR
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "ConfigurationError"
    assert error["command"] == "run"
    assert error["schema_version"] == 1
    assert (out / LOG_FILE).exists()


def test_unknown_command(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config_file), "--out", str(out)]) == EXIT_CONFIG_ERROR
    assert "Command should be run, sweep or verify" in json.loads((out / "error.json").read_text())["message"]


def test_run_command_writes_records(tmp_path, config_file):
    out = tmp_path / "out"
    status = main(
        [
            "run",
            "--config",
            str(config_file),
            "--out",
            str(out),
            "--replicas",
            "1..2",
            "--mode",
            "independent",
            "--workers",
            "1",
        ]
    )
    assert status == EXIT_OK
    summary = json.loads((out / "run_summary.json").read_text())
    assert summary["replicas"] == [1, 2]
    assert summary["passed"] is True
    assert summary["mode"] == "independent"
    for replica in (1, 2):
        assert (out / "runs" / f"independent_replica_{replica:04d}.json").exists()
        assert (out / "runs" / f"independent_replica_{replica:04d}.csv").exists()
    saved = json.loads((out / "config.json").read_text())
    assert saved["output"]["directory"] == str(out)
    assert not (out / "error.json").exists()


def convergence_table(errors, err_ci):
    rows = [
        ConvergenceRow(index, f"canonical N={index}", norm, norm, err, err_ci, norm**2, 0.0, 4, 0, False)
        for index, (norm, err) in enumerate(zip([0.4, 0.3, 0.2, 0.1], errors), 1)
    ]
    return ConvergenceTable(rows, ["a"])


@pytest.mark.parametrize(
    "errors, err_ci, expected",
    [
        ([1.0, 0.9, 0.85, 0.8], 0.5, EXIT_CHECK_FAILED),
        ([1.0, 0.6, 0.4, 0.2], 0.05, EXIT_OK),
    ],
)
def test_sweep_status_needs_separated_end_rows(tmp_path, config_file, mocker, errors, err_ci, expected):
    mocker.patch("StochasticVlasov.entry.run_sweep", return_value=convergence_table(errors, err_ci))
    mocker.patch("StochasticVlasov.entry.noise_floor", return_value=(0.0, 0.0))
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config_file), "--out", str(out), "--workers", "1"]) == expected
    assert (out / "convergence_table.csv").exists()
    assert (out / "martingale_trend.json").exists()


def test_log_and_error_report_follow_the_configured_directory(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    configured = tmp_path / "configured"
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config_dict(output={"directory": str(configured)})), encoding="utf-8")
    assert main(["simulate", "--config", str(path)]) == EXIT_CONFIG_ERROR
    assert (configured / "error.json").exists()
    assert (configured / LOG_FILE).exists()
    assert main(["run", "--config", str(path), "--replicas", "0", "--workers", "1"]) == EXIT_OK
    assert (configured / "config.json").exists()
    assert (configured / LOG_FILE).stat().st_size > 0
    assert not (tmp_path / "results").exists()
