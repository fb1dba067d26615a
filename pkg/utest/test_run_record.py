import numpy as np
from approvaltests import verify

from StochasticVlasov.simulation.diagnostics import EnergyLedger
from StochasticVlasov.simulation.run_record import (
    ArtifactWriter,
    RunRecord,
    failed_fraction,
    read_record,
    successful,
)
from StochasticVlasov.utils.data_types import SteppingMode


def make_record(replica_id=3, status="ok"):
    record = RunRecord("abc123", replica_id, SteppingMode.common, "canonical N=1", EnergyLedger(0.0, 1.0))
    record.append(0.0, 1.5, -0.5, {"obs": 0.25})
    record.append(0.5, 1.75, -0.25, {"obs": 0.125})
    record.particle_steps = 128
    record.rng = {"seed": 7, "replica": replica_id}
    record.status = status
    return record


def test_record_rows():
    record = make_record()
    assert record.csv_header() == ["t", "kinetic", "potential", "residual", "obs"]
    assert record.csv_rows() == [[0.0, 1.5, -0.5, 0.0, 0.25], [0.5, 1.75, -0.25, 0.5, 0.125]]
    assert np.allclose(record.observable_matrix(["obs"]), [[0.25, 0.125]])
    assert record.file_stem == "common_replica_0003"


def test_record_dict_round_trip():
    record = make_record()
    record.wall_clock = 1.25
    data = record.to_dict()
    assert data["schema_version"] == 1
    assert data["mode"] == "common"
    assert data["ledger"]["residual"] == [0.0, 0.5]
    assert RunRecord.from_dict(data) == record


def test_write_json_is_sorted_and_versioned(tmp_path):
    writer = ArtifactWriter(tmp_path)
    path = writer.write_json(
        "summary.json",
        {"passed": True, "replicas": (0, 1), "mode": SteppingMode.independent, "value": np.float64(0.5)},
    )
    verify(path.read_text(encoding="utf-8"))


def test_write_record(tmp_path):
    writer = ArtifactWriter(tmp_path)
    record = make_record()
    written = writer.write_record(record)
    assert [path.name for path in written] == ["common_replica_0003.json", "common_replica_0003.csv"]
    assert (tmp_path / "runs" / "common_replica_0003.csv").read_text(encoding="utf-8").splitlines() == [
        "t,kinetic,potential,residual,obs",
        "0.0,1.5,-0.5,0.0,0.25",
        "0.5,1.75,-0.25,0.5,0.125",
    ]
    assert read_record(written[0]) == record


def test_write_record_honours_formats(tmp_path):
    writer = ArtifactWriter(tmp_path, formats=("json",))
    written = writer.write_record(make_record(), subdirectory="")
    assert written == [tmp_path / "common_replica_0003.json"]
    assert not (tmp_path / "common_replica_0003.csv").exists()


def test_failed_records():
    records = [make_record(0), make_record(1, status="failed"), make_record(2), make_record(3)]
    assert records[1].failed
    assert failed_fraction(records) == 0.25
    assert [record.replica_id for record in successful(records)] == [0, 2, 3]
    assert failed_fraction([]) == 0.0
