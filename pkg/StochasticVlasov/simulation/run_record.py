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
"""Run records and the artifact writer that persists them.

CSV files carry a header row with ``t`` in the first column. JSON files carry
``schema_version`` and are written with sorted keys, so identical runs give
byte-identical files.
"""
import csv
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from ..utils import logger
from ..utils.data_types import SteppingMode
from ..utils.meta_python import to_plain
from .diagnostics import EnergyLedger

SCHEMA_VERSION = 1


@dataclass
class RunRecord:
    config_hash: str
    replica_id: int
    mode: SteppingMode
    noise_label: str
    ledger: EnergyLedger
    times: List[float] = field(default_factory=list)
    observables: Dict[str, List[float]] = field(default_factory=dict)
    particle_steps: int = 0
    rng: Dict = field(default_factory=dict)
    status: str = "ok"
    diagnostic: str = ""
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def failed(self) -> bool:
        return self.status != "ok"

    @property
    def file_stem(self) -> str:
        return f"{self.mode.name}_replica_{self.replica_id:04d}"

    def append(self, t: float, kinetic: float, potential: float, values: Dict[str, float]):
        self.times.append(float(t))
        self.ledger.record(t, kinetic, potential)
        for name, value in values.items():
            self.observables.setdefault(name, []).append(float(value))

    def observable_matrix(self, names: Sequence[str]) -> np.ndarray:
        return np.array([self.observables[name] for name in names], dtype=float)

    def csv_header(self) -> List[str]:
        return ["t", "kinetic", "potential", "residual"] + list(self.observables)

    def csv_rows(self) -> List[List[float]]:
        residual = self.ledger.residual
        rows = []
        for index, t in enumerate(self.times):
            row = [t, self.ledger.kinetic[index], self.ledger.potential[index], float(residual[index])]
            rows.append(row + [values[index] for values in self.observables.values()])
        return rows

    def to_dict(self) -> Dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "replica_id": self.replica_id,
            "mode": self.mode.name,
            "noise": self.noise_label,
            "times": list(self.times),
            "observables": {name: list(values) for name, values in self.observables.items()},
            "ledger": self.ledger.to_dict(),
            "particle_steps": self.particle_steps,
            "rng": self.rng,
            "status": self.status,
            "diagnostic": self.diagnostic,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunRecord":
        return cls(
            config_hash=data["config_hash"],
            replica_id=int(data["replica_id"]),
            mode=SteppingMode[data["mode"]],
            noise_label=data.get("noise", ""),
            ledger=EnergyLedger.from_dict(data["ledger"]),
            times=[float(t) for t in data["times"]],
            observables={name: [float(v) for v in values] for name, values in data["observables"].items()},
            particle_steps=int(data.get("particle_steps", 0)),
            rng=dict(data.get("rng", {})),
            status=data.get("status", "ok"),
            diagnostic=data.get("diagnostic", ""),
        )


class ArtifactWriter:
    """Single writer for every file below ``directory``; one lock per output file."""

    def __init__(self, directory: Any, formats: Iterable[str] = ("csv", "json")):
        self.directory = Path(directory)
        self.formats = tuple(formats)
        self._locks: Dict[Path, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, path: Path) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(path, threading.Lock())

    def path(self, name: str) -> Path:
        return self.directory / name

    def write_json(self, name: str, payload: Dict) -> Path:
        path = self.path(name)
        document = {"schema_version": SCHEMA_VERSION, **to_plain(payload)}
        with self._lock(path):
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.debug(f"Wrote {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.path(name)
        with self._lock(path):
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([to_plain(value) for value in row])
        logger.debug(f"Wrote {path}")
        return path

    def write_record(self, record: RunRecord, subdirectory: str = "runs") -> List[Path]:
        written = []
        stem = f"{subdirectory}/{record.file_stem}" if subdirectory else record.file_stem
        if "json" in self.formats:
            written.append(self.write_json(f"{stem}.json", record.to_dict()))
        if "csv" in self.formats:
            written.append(self.write_csv(f"{stem}.csv", record.csv_header(), record.csv_rows()))
        return written


def read_record(path: Any) -> RunRecord:
    return RunRecord.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def failed_fraction(records: Sequence[RunRecord]) -> float:
    return sum(record.failed for record in records) / len(records) if records else 0.0


def successful(records: Sequence[RunRecord]) -> List[RunRecord]:
    return [record for record in records if not record.failed]

