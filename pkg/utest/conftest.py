from unittest.mock import MagicMock

import pytest

from StochasticVlasov.base import SpecCache
from StochasticVlasov.simulation.experiment_config import config_from_dict
from StochasticVlasov.simulation.run_record import ArtifactWriter
from StochasticVlasov.simulation.statistics import DEFAULT_CI_LEVEL

SMALL_CONFIG = {
    "physical": {"kappa": 0.1, "magnetic": 1.0, "delta": 0.05},
    "noise": {"variant": "Canonical", "mode_cutoff": 2, "family_indices": [1, 2]},
    "discretization": {
        "particles": 64,
        "dt": 0.01,
        "horizon": 0.05,
        "field_cutoff": 2,
        "grid": 8,
        "record_every": 1,
    },
    "statistics": {
        "replicas": 4,
        "observables": [
            {"mode": [1, 0, 0], "width": 1.0},
            {"mode": [0, 0, 0], "center": [1.0, 0.0, 0.0], "width": 0.5},
        ],
    },
    "seeds": {"master": 7},
}


def small_config_dict(**blocks) -> dict:
    data = {name: dict(block) for name, block in SMALL_CONFIG.items()}
    for name, changes in blocks.items():
        data.setdefault(name, {}).update(changes)
    return data


@pytest.fixture
def small_config(tmp_path):
    return config_from_dict(small_config_dict(output={"directory": str(tmp_path / "results")}), environ={})


@pytest.fixture
def library(small_config):
    library = MagicMock()
    library.config = small_config
    library.workers = 1
    library.ci_level = DEFAULT_CI_LEVEL
    library.output_dir = small_config.output.directory
    library.writer = ArtifactWriter(small_config.output.directory)
    library._spec_cache = SpecCache()
    library._verdicts = []
    library._keyword_formatters = {}
    return library
