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
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

from assertionengine import AssertionOperator, float_str_verify_assertion, verify_assertion

from ..base import LibraryComponent
from ..errors import ConfigurationError
from ..simulation.experiment_config import (
    BLOCKS,
    ExperimentConfig,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
    serialize,
    with_overrides,
)
from ..utils import keyword, logger


class Configuration(LibraryComponent):
    @keyword(tags=("Setter", "Config"))
    def load_experiment_config(self, path: str) -> ExperimentConfig:
        """Loads an experiment config JSON file and makes it the active config.

        Missing fields take their defaults; unknown keys, violated constraints
        and malformed JSON fail with the offending path. ``κ`` is derived from
        ``τ`` and ``k_T²`` when it is not given.

        The ``STOCHVLASOV_OUTPUT_DIR`` environment variable overrides ``output.directory``.

        Example:
        | `Load Experiment Config`    ${CURDIR}/configs/canonical.json
        """
        self.config = load_config(path)
        logger.info(f"Loaded experiment config {path} (hash {config_hash(self.config)[:12]})")
        return self.config

    @keyword(tags=("Setter", "Config"))
    def update_experiment_config(self, block: str, **changes) -> ExperimentConfig:
        """Changes fields of one config ``block`` and revalidates the whole config.

        Changed fields are marked as ``override`` in the provenance. Derived
        values of ``physical`` are derived again from the new values.

        Example:
        | `Update Experiment Config`    discretization    particles=2000    dt=0.01
        | `Update Experiment Config`    physical    kappa=0.05
        """
        if block not in BLOCKS:
            raise ConfigurationError(f"Unknown config block '{block}', expected one of {', '.join(BLOCKS)}")
        config = self.config
        data = config_to_dict(config)
        if block == "physical":
            for name in ("kappa", "tau", "kT2"):
                if config.provenance.get(f"physical.{name}") == "derived" and name not in changes:
                    data["physical"].pop(name)
        data[block].update(changes)
        updated = config_from_dict(data, environ={})
        provenance = {**updated.provenance, **config.provenance}
        for path, origin in updated.provenance.items():
            if origin == "derived":
                provenance[path] = origin
        for name in changes:
            provenance[f"{block}.{name}"] = "override"
        self.config = replace(updated, provenance=provenance)
        return self.config

    @keyword(tags=("Setter", "Config"))
    def override_experiment_config(
        self, seed: Optional[int] = None, output_dir: Optional[str] = None
    ) -> ExperimentConfig:
        """Overrides the master seed and the output directory of the active config."""
        self.config = with_overrides(self.config, None if seed is None else int(seed), output_dir)
        return self.config

    @keyword(tags=("Getter", "Assertion", "Config"))
    def get_config_value(
        self,
        path: str,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> Any:
        """Returns the config value at a dotted ``path`` such as ``physical.kappa``.

        Enum values are returned by name and tuples as lists.

        Optionally asserts the value, see `Assertions`. Numbers are compared
        numerically, other values as they are.

        Example:
        | `Get Config Value`    noise.variant    ==    Canonical
        """
        block, _, name = path.partition(".")
        data = config_to_dict(self.config)
        if block not in BLOCKS or name not in data[block]:
            raise ConfigurationError(f"Unknown config path '{path}'")
        value = data[block][name]
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float_str_verify_assertion(
                value, assertion_operator, assertion_expected, f"Config value {path}", message
            )
        formatter = self.keyword_formatters.get(self.get_config_value)
        return verify_assertion(
            value, assertion_operator, assertion_expected, f"Config value {path}", message, formatter
        )

    @keyword(tags=("Getter", "Config"))
    def get_config_hash(self) -> str:
        """Returns the SHA-256 of the canonical config; the ``output`` block does not contribute."""
        return config_hash(self.config)

    @keyword(tags=("Getter", "Config"))
    def get_config_provenance(self, path: Optional[str] = None) -> Any:
        """Returns where config values came from: ``file``, ``default``, ``derived``, ``override`` or ``environment``.

        ``path`` A dotted path; without it the whole provenance dictionary is returned.
        """
        provenance: Dict[str, str] = dict(self.config.provenance)
        if path is None:
            return provenance
        if path not in provenance:
            known = [f"{name}.{item.name}" for name, block in BLOCKS.items() for item in fields(block)]
            if path not in known:
                raise ConfigurationError(f"Unknown config path '{path}'")
            return "default"
        return provenance[path]

    @keyword(tags=("Config",))
    def save_experiment_config(self, path: Optional[str] = None) -> Path:
        """Writes the active config as canonical JSON, by default ``config.json`` in the output directory."""
        target = Path(path) if path else self.output_dir / "config.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(serialize(self.config), encoding="utf-8")
        logger.info(f"Experiment config saved to {target}")
        return target
