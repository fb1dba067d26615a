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
import json
from pathlib import Path
from typing import Dict

SMALL_CONFIG: Dict = {
    "physical": {"kappa": 0.1, "magnetic": 1.0, "delta": 0.05},
    "noise": {"variant": "Canonical", "mode_cutoff": 2, "family_indices": [1, 2]},
    "discretization": {"particles": 256, "dt": 0.01, "horizon": 0.05, "field_cutoff": 2, "grid": 8, "record_every": 1},
    "statistics": {"replicas": 4},
    "seeds": {"master": 7},
}


def write_small_config(directory: str, name: str = "small.json", **blocks) -> str:
    """Writes the small acceptance config with ``blocks`` merged in and returns its path."""
    data = {block: dict(values) for block, values in SMALL_CONFIG.items()}
    for block, values in blocks.items():
        data.setdefault(block, {}).update(values)
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return str(path)
