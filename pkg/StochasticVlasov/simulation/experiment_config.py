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
"""Experiment configuration: one JSON document fully determines a run.

Blocks ``physical``, ``noise``, ``discretization``, ``statistics``, ``seeds``
and ``output``. Every field has a default; ``ExperimentConfig.provenance``
records for each dotted path whether the value came from the ``file``, a
``default``, was ``derived`` from other fields, was an ``override`` or came
from the ``environment``.
"""
import hashlib
import json
import os
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from ..errors import BudgetExceededError, ConfigurationError
from ..utils.data_types import AmplitudeLaw, BlobShape, NoiseEvaluation, NoiseVariant
from ..utils.robot_booleans import is_boolean_like, is_truthy
from .blob_profile import BlobProfile
from .diagnostics import Observable, default_battery
from .noise_model import NoiseSpec, blob_noise, canonical_noise
from .particle_sde import StepConfig

CONFIG_SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "STOCHVLASOV_OUTPUT_DIR"
KAPPA_CONSTRAINT = "kappa = tau * kT2 / 6"
DEFAULT_KAPPA = 0.1
DEFAULT_TAU = 0.01
OUTPUT_FORMATS = ("csv", "json")

Converter = Callable[[Any, str], Any]


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigurationError(f"'{path}' expects a number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{path}' expects a number, got {value!r}")
    if np.isnan(number):
        raise ConfigurationError(f"'{path}' must not be NaN")
    return number


def _int(value: Any, path: str) -> int:
    number = _float(value, path)
    if not np.isfinite(number) or int(number) != number:
        raise ConfigurationError(f"'{path}' expects an integer, got {value!r}")
    return int(number)


def _bool(value: Any, path: str) -> bool:
    if not is_boolean_like(value):
        raise ConfigurationError(f"'{path}' expects a boolean, got {value!r}")
    return is_truthy(value)


def _str(value: Any, path: str) -> str:
    return str(value)


def _optional(converter: Converter) -> Converter:
    def convert(value: Any, path: str):
        return None if value is None else converter(value, path)

    return convert


def _enum(enum_type) -> Converter:
    def convert(value: Any, path: str):
        if isinstance(value, enum_type):
            return value
        try:
            return enum_type[str(value)]
        except KeyError:
            names = ", ".join(member.name for member in enum_type)
            raise ConfigurationError(f"'{path}' must be one of {names}, got {value!r}")

    return convert


def _tuple_of(converter: Converter) -> Converter:
    def convert(value: Any, path: str):
        if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
            raise ConfigurationError(f"'{path}' expects a list, got {value!r}")
        return tuple(converter(item, f"{path}[{index}]") for index, item in enumerate(value))

    return convert


def _observable(value: Any, path: str) -> Observable:
    if isinstance(value, Observable):
        return value
    if not isinstance(value, Mapping):
        raise ConfigurationError(f"'{path}' expects an observable object, got {value!r}")
    unknown = set(value) - {"mode", "center", "width", "kind"}
    if unknown:
        raise ConfigurationError(f"'{path}' has unknown keys {sorted(unknown)}")
    try:
        return Observable.from_dict(dict(value))
    except (KeyError, TypeError, ValueError) as error:
        raise ConfigurationError(f"'{path}' is not a valid observable: {error}")


def _setting(default: Any, converter: Converter, **kwargs):
    if isinstance(default, tuple) or callable(default):
        factory = default if callable(default) else (lambda: default)
        return field(default_factory=factory, metadata={"convert": converter}, **kwargs)
    return field(default=default, metadata={"convert": converter}, **kwargs)


@dataclass(frozen=True)
class PhysicalConfig:
    kappa: Optional[float] = _setting(None, _optional(_float))
    tau: Optional[float] = _setting(None, _optional(_float))
    kT2: Optional[float] = _setting(None, _optional(_float))
    magnetic: float = _setting(1.0, _float)
    delta: float = _setting(0.05, _float)
    coulomb_sign: float = _setting(1.0, _float)
    self_consistent: bool = _setting(True, _bool)


@dataclass(frozen=True)
class NoiseConfig:
    variant: NoiseVariant = _setting(NoiseVariant.Canonical, _enum(NoiseVariant))
    mode_cutoff: int = _setting(4, _int)
    family_indices: Tuple[int, ...] = _setting((1, 2, 3, 4), _tuple_of(_int))
    family_index: Optional[int] = _setting(None, _optional(_int))
    blob_shape: BlobShape = _setting(BlobShape.bump, _enum(BlobShape))
    blob_radius: float = _setting(0.25, _float)
    blob_mass: float = _setting(1.0, _float)
    ell: float = _setting(0.05, _float)
    amplitude_law: AmplitudeLaw = _setting(AmplitudeLaw.two_point, _enum(AmplitudeLaw))
    amplitude_mean: float = _setting(0.0, _float)
    evaluation: NoiseEvaluation = _setting(NoiseEvaluation.midpoint, _enum(NoiseEvaluation))


@dataclass(frozen=True)
class DiscretizationConfig:
    particles: int = _setting(20000, _int)
    dt: float = _setting(5e-3, _float)
    horizon: float = _setting(0.5, _float)
    field_cutoff: int = _setting(4, _int)
    grid: int = _setting(16, _int)
    record_every: int = _setting(10, _int)
    amplitude: float = _setting(0.1, _float)
    temperature: float = _setting(1.0, _float)
    mass: float = _setting(1.0, _float)
    draws_per_step: int = _setting(1, _int)


@dataclass(frozen=True)
class StatisticsConfig:
    replicas: int = _setting(32, _int)
    observables: Tuple[Observable, ...] = _setting(default_battery, _tuple_of(_observable))
    ci_level: float = _setting(0.9973, _float)
    crn: bool = _setting(True, _bool)
    max_particle_steps: float = _setting(1e10, _float)
    histogram_spatial: int = _setting(8, _int)
    histogram_velocity: int = _setting(16, _int)
    histogram_extent: float = _setting(4.0, _float)
    probe_points: int = _setting(20, _int)
    probe_size: float = _setting(1e-4, _float)


@dataclass(frozen=True)
class SeedsConfig:
    master: int = _setting(20240601, _int)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = _setting("results", _str)
    formats: Tuple[str, ...] = _setting(OUTPUT_FORMATS, _tuple_of(_str))


BLOCKS: Dict[str, Any] = {
    "physical": PhysicalConfig,
    "noise": NoiseConfig,
    "discretization": DiscretizationConfig,
    "statistics": StatisticsConfig,
    "seeds": SeedsConfig,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    physical: PhysicalConfig = field(default_factory=PhysicalConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    statistics: StatisticsConfig = field(default_factory=StatisticsConfig)
    seeds: SeedsConfig = field(default_factory=SeedsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    provenance: Dict[str, str] = field(default_factory=dict, compare=False, repr=False)

    @property
    def kappa(self) -> float:
        return float(self.physical.kappa)  # type: ignore

    @property
    def seed(self) -> int:
        return self.seeds.master

    @property
    def steps(self) -> int:
        return int(round(self.discretization.horizon / self.discretization.dt))

    @property
    def run_family_index(self) -> int:
        if self.noise.family_index is not None:
            return self.noise.family_index
        return self.noise.family_indices[-1]

    def step_config(self, dt: Optional[float] = None) -> StepConfig:
        return StepConfig(
            dt=self.discretization.dt if dt is None else dt,
            magnetic=self.physical.magnetic,
            delta=self.physical.delta,
            mode_cutoff=self.discretization.field_cutoff,
            self_consistent=self.physical.self_consistent,
            coulomb_sign=self.physical.coulomb_sign,
            noise_evaluation=self.noise.evaluation,
        )

    def blob_profile(self) -> BlobProfile:
        return BlobProfile(self.noise.blob_shape, self.noise.blob_radius, self.noise.blob_mass)

    def noise_spec(self, family_index: Optional[int] = None) -> Optional[NoiseSpec]:
        """The configured common-noise spec; ``None`` when ``kappa = 0``.

        ``family_index`` N selects the canonical family member, or the blob
        scale ``ell / N`` for blob variants.
        """
        if self.kappa == 0:
            return None
        if self.noise.variant is NoiseVariant.Canonical:
            index = self.run_family_index if family_index is None else family_index
            return canonical_noise(self.kappa, index, self.noise.mode_cutoff)
        ell = self.noise.ell if family_index is None else self.noise.ell / family_index
        return blob_noise(
            self.physical.tau,  # type: ignore
            self.physical.kT2,  # type: ignore
            ell,
            self.blob_profile(),
            self.noise.mode_cutoff,
            renewal=self.noise.variant is NoiseVariant.Renewal,
            amplitude_law=self.noise.amplitude_law,
            amplitude_mean=self.noise.amplitude_mean,
        )

    def with_discretization(self, **changes) -> "ExperimentConfig":
        updated = replace(self, discretization=replace(self.discretization, **changes))
        validate(updated)
        return updated

    def with_physical(self, **changes) -> "ExperimentConfig":
        updated = replace(self, physical=replace(self.physical, **changes))
        validate(updated)
        return updated


def _parse_block(block_type, data: Any, prefix: str, provenance: Dict[str, str]):
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"Config block '{prefix}' must be an object, got {type(data).__name__}")
    known = {item.name: item for item in fields(block_type)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(f"Unknown key(s) in '{prefix}': {', '.join(unknown)}")
    values = {}
    for name, item in known.items():
        path = f"{prefix}.{name}"
        if name in data:
            values[name] = item.metadata["convert"](data[name], path)
            provenance[path] = "file"
        else:
            provenance[path] = "default"
    return block_type(**values)


def _resolve_kappa(physical: PhysicalConfig, variant: NoiseVariant, provenance: Dict[str, str]) -> PhysicalConfig:
    kappa, tau, kT2 = physical.kappa, physical.tau, physical.kT2
    if kappa is not None and tau is not None and kT2 is not None:
        expected = tau * kT2 / 6.0
        if abs(kappa - expected) > 1e-12 * max(1.0, abs(kappa)):
            raise ConfigurationError(
                f"kappa={kappa} violates the constraint {KAPPA_CONSTRAINT} "
                f"(tau={tau}, kT2={kT2} give {expected})"
            )
        return physical
    if kappa is None and tau is not None and kT2 is not None:
        provenance["physical.kappa"] = "derived"
        return replace(physical, kappa=tau * kT2 / 6.0)
    if kappa is None and (tau is not None or kT2 is not None):
        raise ConfigurationError(f"Both tau and kT2 are needed to derive kappa from {KAPPA_CONSTRAINT}")
    if kappa is None:
        kappa = DEFAULT_KAPPA
        physical = replace(physical, kappa=kappa)
    if variant is NoiseVariant.Canonical or kappa == 0:
        return physical
    if tau is None and kT2 is None:
        tau = DEFAULT_TAU
        provenance["physical.tau"] = "derived"
    if kT2 is None:
        kT2 = 6.0 * kappa / tau  # type: ignore
        provenance["physical.kT2"] = "derived"
    else:
        tau = 6.0 * kappa / kT2
        provenance["physical.tau"] = "derived"
    return replace(physical, tau=tau, kT2=kT2)


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigurationError(message)


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """Check every positivity and consistency constraint; raises `ConfigurationError`."""
    physical, noise, disc, statistics = config.physical, config.noise, config.discretization, config.statistics
    _require(config.kappa >= 0, f"physical.kappa must be non-negative, got {config.kappa}")
    for name in ("tau", "kT2"):
        value = getattr(physical, name)
        _require(value is None or value > 0, f"physical.{name} must be positive, got {value}")
    _require(0 < physical.delta < 0.5, f"physical.delta must lie in (0, 1/2), got {physical.delta}")
    _require(
        physical.coulomb_sign in (1.0, -1.0), f"physical.coulomb_sign must be +1 or -1, got {physical.coulomb_sign}"
    )
    _require(noise.mode_cutoff >= 1, f"noise.mode_cutoff must be at least 1, got {noise.mode_cutoff}")
    indices = noise.family_indices
    _require(len(indices) >= 1, "noise.family_indices must not be empty")
    _require(
        all(a < b for a, b in zip(indices, indices[1:])) and indices[0] >= 1,
        f"noise.family_indices must be positive and strictly increasing, got {list(indices)}",
    )
    if noise.variant is NoiseVariant.Canonical:
        _require(
            max(indices + (config.run_family_index,)) <= noise.mode_cutoff,
            f"noise.family_indices must not exceed noise.mode_cutoff={noise.mode_cutoff}",
        )
    _require(0 < noise.ell <= 0.25, f"noise.ell must lie in (0, 1/4], got {noise.ell}")
    _require(noise.blob_radius > 0 and noise.blob_mass > 0, "noise.blob_radius and noise.blob_mass must be positive")
    _require(disc.particles >= 1, f"discretization.particles must be positive, got {disc.particles}")
    _require(disc.dt > 0, f"discretization.dt must be positive, got {disc.dt}")
    _require(disc.horizon >= 0, f"discretization.horizon must be non-negative, got {disc.horizon}")
    _require(
        abs(config.steps * disc.dt - disc.horizon) <= 1e-9 * max(1.0, disc.horizon),
        f"discretization.horizon={disc.horizon} must be a multiple of dt={disc.dt}",
    )
    _require(
        abs(physical.magnetic) * disc.dt < np.pi,
        f"|physical.magnetic| * discretization.dt must stay below pi, got {abs(physical.magnetic) * disc.dt}",
    )
    _require(disc.field_cutoff >= 1, f"discretization.field_cutoff must be at least 1, got {disc.field_cutoff}")
    _require(
        disc.grid >= 2 * disc.field_cutoff + 2,
        f"discretization.grid={disc.grid} aliases field modes up to {disc.field_cutoff}; "
        f"need >= {2 * disc.field_cutoff + 2}",
    )
    _require(disc.record_every >= 1, f"discretization.record_every must be positive, got {disc.record_every}")
    _require(0 <= disc.amplitude < 1, f"discretization.amplitude must lie in [0, 1), got {disc.amplitude}")
    _require(disc.temperature > 0 and disc.mass > 0, "discretization.temperature and mass must be positive")
    _require(disc.draws_per_step >= 1, f"discretization.draws_per_step must be positive, got {disc.draws_per_step}")
    _require(statistics.replicas >= 1, f"statistics.replicas must be positive, got {statistics.replicas}")
    _require(0 < statistics.ci_level < 1, f"statistics.ci_level must lie in (0, 1), got {statistics.ci_level}")
    _require(statistics.max_particle_steps > 0, "statistics.max_particle_steps must be positive")
    _require(len(statistics.observables) >= 1, "statistics.observables must not be empty")
    _require(
        statistics.histogram_spatial >= 1 and statistics.histogram_velocity >= 1 and statistics.histogram_extent > 0,
        "statistics histogram resolutions and extent must be positive",
    )
    _require(statistics.probe_points >= 1 and statistics.probe_size > 0, "statistics probe settings must be positive")
    _require(config.seeds.master >= 0, f"seeds.master must be non-negative, got {config.seeds.master}")
    unknown = sorted(set(config.output.formats) - set(OUTPUT_FORMATS))
    _require(not unknown, f"output.formats supports {', '.join(OUTPUT_FORMATS)}, got {unknown}")
    if physical.tau is not None and physical.kT2 is not None:
        expected = physical.tau * physical.kT2 / 6.0
        _require(
            abs(config.kappa - expected) <= 1e-12 * max(1.0, config.kappa),
            f"kappa={config.kappa} violates the constraint {KAPPA_CONSTRAINT}",
        )
    return config


def config_from_dict(data: Mapping, environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"Config root must be an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(BLOCKS) - {"schema_version"})
    if unknown:
        raise ConfigurationError(f"Unknown config block(s): {', '.join(unknown)}")
    version = data.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ConfigurationError(f"Unsupported config schema_version {version}, expected {CONFIG_SCHEMA_VERSION}")
    provenance: Dict[str, str] = {}
    blocks = {name: _parse_block(block_type, data.get(name), name, provenance) for name, block_type in BLOCKS.items()}
    blocks["physical"] = _resolve_kappa(blocks["physical"], blocks["noise"].variant, provenance)
    environ = os.environ if environ is None else environ
    if environ.get(OUTPUT_DIR_ENV):
        blocks["output"] = replace(blocks["output"], directory=environ[OUTPUT_DIR_ENV])
        provenance["output.directory"] = "environment"
    return validate(ExperimentConfig(**blocks, provenance=provenance))


def load_config(path: Any, environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file '{path}' does not exist")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigurationError(
            f"Config file '{path}' is not valid JSON at line {error.lineno} column {error.colno}: {error.msg}"
        )
    return config_from_dict(data, environ)


def default_config(environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    return config_from_dict({}, {} if environ is None else environ)


def _plain(value: Any) -> Any:
    if isinstance(value, Observable):
        return value.to_dict()
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, tuple):
        return [_plain(item) for item in value]
    return value


def config_to_dict(config: ExperimentConfig, include_output: bool = True) -> Dict:
    result: Dict[str, Any] = {"schema_version": CONFIG_SCHEMA_VERSION}
    for name in BLOCKS:
        if name == "output" and not include_output:
            continue
        block = getattr(config, name)
        result[name] = {item.name: _plain(getattr(block, item.name)) for item in fields(block)}
    return result


def serialize(config: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of every field that affects results (output block excluded)."""
    canonical = json.dumps(config_to_dict(config, include_output=False), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def with_overrides(
    config: ExperimentConfig, seed: Optional[int] = None, output_dir: Optional[str] = None
) -> ExperimentConfig:
    provenance = dict(config.provenance)
    updated = config
    if seed is not None:
        updated = replace(updated, seeds=replace(updated.seeds, master=int(seed)))
        provenance["seeds.master"] = "override"
    if output_dir is not None:
        updated = replace(updated, output=replace(updated.output, directory=str(output_dir)))
        provenance["output.directory"] = "override"
    return validate(replace(updated, provenance=provenance))


def estimated_particle_steps(config: ExperimentConfig, rows: int = 1, modes: int = 1) -> float:
    return float(config.discretization.particles) * config.steps * config.statistics.replicas * rows * modes


def check_budget(config: ExperimentConfig, particle_steps: float):
    ceiling = config.statistics.max_particle_steps
    if particle_steps > ceiling:
        raise BudgetExceededError(
            f"Estimated {particle_steps:.3g} particle-steps exceed the ceiling "
            f"statistics.max_particle_steps={ceiling:.3g}"
        )
