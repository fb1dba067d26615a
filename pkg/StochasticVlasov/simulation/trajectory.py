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
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import NumericalError
from ..utils import logger
from ..utils.data_types import NoiseVariant, SteppingMode
from .diagnostics import EnergyLedger, kinetic_energy, observable_value
from .experiment_config import ExperimentConfig, config_hash
from .initial_state import sample_initial_ensemble
from .noise_model import NoiseSpec
from .particle_sde import ParticleEnsemble, step_common_noise, step_independent_noise
from .renewal import RenewalProcess
from .run_record import RunRecord
from .streams import StreamPurpose, provenance, refined_normals, stream
from .torus_kernel import SpectralKernel, potential_energy

Snapshot = Callable[[float, ParticleEnsemble], None]
_CONFIGURED: Any = object()
_UINT63 = 2**63


def noise_seed(config: ExperimentConfig, mode: SteppingMode, family_index: Optional[int] = None) -> int:
    """Seed of the per-step noise streams.

    With common random numbers every mode and family index shares the master
    seed, so draws of equal shape coincide and longer draws share a prefix.
    """
    if config.statistics.crn:
        return config.seed
    salt = 1 + 1000 * (mode is SteppingMode.independent) + (family_index or 0)
    return (config.seed + 1_000_003 * salt) % _UINT63


def _record_state(
    record: RunRecord,
    ensemble: ParticleEnsemble,
    kernel: Optional[SpectralKernel],
    config: ExperimentConfig,
    t: float,
    on_record: Optional[Snapshot],
):
    if not np.all(np.isfinite(ensemble.velocities)):
        raise NumericalError(f"Non-finite particle velocities at t={t}")
    potential = potential_energy(ensemble, kernel) if kernel is not None else 0.0
    values = {obs.name: observable_value(ensemble, obs) for obs in config.statistics.observables}
    record.append(t, kinetic_energy(ensemble), potential, values)
    if on_record is not None:
        on_record(t, ensemble)


def run_trajectory(
    config: ExperimentConfig,
    mode: SteppingMode,
    replica_id: int,
    noise: Any = _CONFIGURED,
    family_index: Optional[int] = None,
    draws_per_step: Optional[int] = None,
    on_record: Optional[Snapshot] = None,
) -> RunRecord:
    """Sample ``f0``, step to the horizon and record energies and observables.

    ``noise`` replaces the configured common-noise spec (``None`` switches the
    noise off); the independent mode always uses ``config.kappa``. Any error
    raised while stepping marks the record as failed instead of propagating.
    """
    started = time.perf_counter()
    disc = config.discretization
    cfg = config.step_config()
    spec: Optional[NoiseSpec] = config.noise_spec(family_index) if noise is _CONFIGURED else noise
    if mode is SteppingMode.independent:
        kappa, label = config.kappa, f"independent kappa={config.kappa:g}"
    else:
        kappa, label = (spec.kappa, spec.label) if spec is not None else (0.0, "none")
    draws = disc.draws_per_step if draws_per_step is None else draws_per_step
    seed = noise_seed(config, mode, family_index)
    renewal = None
    if mode is SteppingMode.common and spec is not None and spec.variant is NoiseVariant.Renewal:
        renewal = RenewalProcess(spec, seed, replica_id)
    kernel = cfg.kernel()
    ensemble = sample_initial_ensemble(
        disc.particles,
        stream(config.seed, replica_id, 0, StreamPurpose.initial_state),
        disc.amplitude,
        disc.temperature,
        disc.mass,
    )
    record = RunRecord(
        config_hash=config_hash(config),
        replica_id=replica_id,
        mode=mode,
        noise_label=label,
        ledger=EnergyLedger(kappa, ensemble.total_weight),
        rng={**provenance(config.seed, replica_id), "noise_seed": seed, "draws_per_step": draws},
    )
    step = 0
    try:
        _record_state(record, ensemble, kernel, config, 0.0, on_record)
        for step in range(config.steps):
            t = step * cfg.dt
            if mode is SteppingMode.common:
                normals = None
                if spec is not None and renewal is None:
                    normals = refined_normals(seed, replica_id, step, 2 * len(spec.modes), draws)
                ensemble = step_common_noise(
                    ensemble, spec, cfg, normals=normals, kernel=kernel, renewal=renewal, time=t
                )
            else:
                normals = refined_normals(seed, replica_id, step, (ensemble.count, 3), draws) if kappa > 0 else None
                ensemble = step_independent_noise(ensemble, kappa, cfg, normals=normals, kernel=kernel)
            record.particle_steps += ensemble.count
            if (step + 1) % disc.record_every == 0 or step + 1 == config.steps:
                _record_state(record, ensemble, kernel, config, (step + 1) * cfg.dt, on_record)
    except (ArithmeticError, ValueError, RuntimeError) as error:
        record.status = "failed"
        record.diagnostic = f"step {step}: {type(error).__name__}: {error}"
        logger.warn(f"Replica {replica_id} ({mode.name}, {label}) failed at {record.diagnostic}")
    record.wall_clock = time.perf_counter() - started
    logger.info(
        f"Replica {replica_id} ({mode.name}, {label}): {record.particle_steps} particle-steps "
        f"in {record.wall_clock:.2f} s"
    )
    return record


def _replica_task(config: ExperimentConfig, mode: SteppingMode, kwargs: dict):
    def task(replica_id: int) -> Tuple[RunRecord, List[Callable]]:
        logger.stash_this_thread()
        try:
            return run_trajectory(config, mode, replica_id, **kwargs), logger.take_thread_stash()
        except BaseException:
            logger.take_thread_stash()
            raise

    return task


def run_replicas(
    config: ExperimentConfig,
    mode: SteppingMode,
    replica_ids: Sequence[int],
    workers: Optional[int] = None,
    **kwargs,
) -> List[RunRecord]:
    """Run replicas on a worker pool; records and log output come back in ``replica_ids`` order."""
    task = _replica_task(config, mode, kwargs)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(task, replica_ids))
    for _, calls in results:
        logger.replay(calls)
    return [record for record, _ in results]
