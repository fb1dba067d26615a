import json

import pytest

from StochasticVlasov.errors import BudgetExceededError, ConfigurationError
from StochasticVlasov.simulation.experiment_config import (
    OUTPUT_DIR_ENV,
    check_budget,
    config_from_dict,
    config_hash,
    default_config,
    estimated_particle_steps,
    load_config,
    serialize,
    with_overrides,
)
from StochasticVlasov.utils.data_types import NoiseEvaluation, NoiseVariant

from .conftest import small_config_dict


def test_default_config():
    config = default_config()
    assert config.kappa == 0.1
    assert config.noise.variant is NoiseVariant.Canonical
    assert config.noise.family_indices == (1, 2, 3, 4)
    assert config.physical.tau is None and config.physical.kT2 is None
    assert config.steps == 100
    assert len(config.statistics.observables) == 12
    assert config.provenance["physical.kappa"] == "default"
    assert config.provenance["output.directory"] == "default"


def test_kappa_is_derived_from_tau_and_kt2():
    config = config_from_dict({"physical": {"tau": 0.02, "kT2": 15.0}}, environ={})
    assert config.kappa == pytest.approx(0.05)
    assert config.provenance["physical.kappa"] == "derived"
    assert config.provenance["physical.tau"] == "file"


def test_blob_variant_derives_time_scales_from_kappa():
    config = config_from_dict({"physical": {"kappa": 0.1}, "noise": {"variant": "Blob"}}, environ={})
    assert config.physical.tau == pytest.approx(0.01)
    assert config.physical.kT2 == pytest.approx(60.0)
    assert config.provenance["physical.tau"] == "derived"
    assert config.provenance["physical.kT2"] == "derived"
    derived = config_from_dict({"physical": {"kappa": 0.1, "kT2": 30.0}, "noise": {"variant": "Renewal"}}, environ={})
    assert derived.physical.tau == pytest.approx(0.02)
    assert derived.provenance["physical.kT2"] == "file"


def test_inconsistent_kappa_is_rejected():
    with pytest.raises(ConfigurationError, match="kappa = tau \\* kT2 / 6"):
        config_from_dict({"physical": {"kappa": 0.1, "tau": 0.01, "kT2": 30.0}}, environ={})
    with pytest.raises(ConfigurationError, match="Both tau and kT2"):
        config_from_dict({"physical": {"tau": 0.01}}, environ={})


def test_unknown_keys_and_blocks():
    with pytest.raises(ConfigurationError, match="Unknown key\\(s\\) in 'physical': temperature"):
        config_from_dict({"physical": {"temperature": 1.0}}, environ={})
    with pytest.raises(ConfigurationError, match="Unknown config block\\(s\\): solver"):
        config_from_dict({"solver": {}}, environ={})
    with pytest.raises(ConfigurationError, match="schema_version"):
        config_from_dict({"schema_version": 2}, environ={})
    with pytest.raises(ConfigurationError, match="must be an object"):
        config_from_dict({"noise": [1, 2]}, environ={})


@pytest.mark.parametrize(
    "blocks",
    [
        {"discretization": {"particles": "many"}},
        {"discretization": {"particles": 1.5}},
        {"physical": {"magnetic": True}},
        {"noise": {"variant": "Colored"}},
        {"noise": {"family_indices": 3}},
        {"statistics": {"crn": "maybe"}},
        {"statistics": {"observables": [{"mode": [1, 0, 0], "phase": 1}]}},
    ],
)
def test_field_types_are_checked(blocks):
    with pytest.raises(ConfigurationError):
        config_from_dict(blocks, environ={})


@pytest.mark.parametrize(
    "blocks, message",
    [
        ({"discretization": {"grid": 5}}, "aliases field modes"),
        ({"discretization": {"horizon": 0.055}}, "multiple of dt"),
        ({"noise": {"family_indices": [2, 1]}}, "strictly increasing"),
        ({"noise": {"family_indices": [1, 5]}}, "must not exceed noise.mode_cutoff"),
        ({"physical": {"magnetic": 400.0}}, "below pi"),
        ({"physical": {"kappa": -0.1}}, "non-negative"),
        ({"physical": {"delta": 0.5}}, "must lie in \\(0, 1/2\\)"),
        ({"physical": {"delta": 0.0}}, "must lie in \\(0, 1/2\\)"),
        ({"output": {"formats": ["xml"]}}, "output.formats"),
    ],
)
def test_validation_errors(blocks, message):
    with pytest.raises(ConfigurationError, match=message):
        config_from_dict(small_config_dict(**blocks), environ={})


def test_output_directory_from_environment():
    config = config_from_dict(small_config_dict(), environ={OUTPUT_DIR_ENV: "/tmp/stochvlasov"})
    assert config.output.directory == "/tmp/stochvlasov"
    assert config.provenance["output.directory"] == "environment"


def test_overrides_are_recorded(small_config):
    updated = with_overrides(small_config, seed=11, output_dir="elsewhere")
    assert updated.seed == 11
    assert updated.output.directory == "elsewhere"
    assert updated.provenance["seeds.master"] == "override"
    assert updated.provenance["output.directory"] == "override"
    assert small_config.seed == 7


def test_config_hash_ignores_output_block(small_config):
    moved = with_overrides(small_config, output_dir="elsewhere")
    assert config_hash(moved) == config_hash(small_config)
    assert config_hash(with_overrides(small_config, seed=8)) != config_hash(small_config)
    assert len(config_hash(small_config)) == 64


def test_serialized_config_loads_back(tmp_path):
    config = config_from_dict(small_config_dict(noise={"variant": "Blob"}), environ={})
    path = tmp_path / "config.json"
    path.write_text(serialize(config), encoding="utf-8")
    loaded = load_config(path, environ={})
    assert loaded == config
    assert config_hash(loaded) == config_hash(config)
    assert json.loads(serialize(config))["schema_version"] == 1


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigurationError, match="does not exist"):
        load_config(tmp_path / "missing.json", environ={})
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "physical": {\n    "kappa": \n}', encoding="utf-8")
    with pytest.raises(ConfigurationError, match="line 4"):
        load_config(broken, environ={})


def test_noise_spec_selection(small_config):
    assert small_config.noise_spec().label == "canonical N=2"
    assert small_config.noise_spec(1).label == "canonical N=1"
    assert small_config.with_physical(kappa=0.0).noise_spec() is None
    blob = config_from_dict(small_config_dict(noise={"variant": "Blob"}), environ={})
    assert blob.noise_spec(2).label == "blob l_N=0.025"


def test_step_config_mirrors_the_experiment(small_config):
    cfg = small_config.step_config()
    assert cfg.dt == 0.01
    assert cfg.magnetic == 1.0
    assert cfg.mode_cutoff == 2
    assert cfg.noise_evaluation is NoiseEvaluation.midpoint
    assert small_config.step_config(0.005).dt == 0.005


def test_budget(small_config):
    steps = estimated_particle_steps(small_config, rows=3)
    assert steps == 64 * 5 * 4 * 3
    check_budget(small_config, steps)
    with pytest.raises(BudgetExceededError, match="max_particle_steps"):
        check_budget(small_config, 1e11)
