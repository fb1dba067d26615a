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
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
from assertionengine import AssertionOperator, float_str_verify_assertion

from ..base import LibraryComponent
from ..simulation.initial_state import initial_density, sample_initial_ensemble
from ..simulation.noise_model import NoiseSpec
from ..simulation.particle_sde import (
    ParticleEnsemble,
    StepConfig,
    jacobian_probe,
    rotate_magnetic,
    step_common_noise,
    step_independent_noise,
)
from ..simulation.renewal import RenewalProcess
from ..simulation.run_record import RunRecord
from ..simulation.streams import StreamPurpose, stream
from ..simulation.torus_kernel import DensityGrid
from ..simulation.trajectory import run_replicas, run_trajectory
from ..utils import NoiseVariant, SteppingMode, as_points, keyword, logger


class ParticleDynamics(LibraryComponent):
    def _stream(self, seed: Optional[int], replica: int, step: int, purpose: StreamPurpose) -> np.random.Generator:
        return stream(self.config.seed if seed is None else int(seed), int(replica), int(step), purpose)

    def _step_config(self, dt: Optional[float]) -> StepConfig:
        return self.config.step_config(None if dt is None else float(dt))

    @keyword(tags=("Setter", "Particles"))
    def sample_initial_ensemble(
        self,
        particles: Optional[int] = None,
        seed: Optional[int] = None,
        replica: int = 0,
    ) -> ParticleEnsemble:
        """Samples ``f0 ∝ (1 + a cos(2π x1)) exp(-|v|²/2θ)`` with equal weights.

        ``particles`` Ensemble size. Defaults to ``discretization.particles``.

        ``seed`` and ``replica`` key the draw; equal keys give equal ensembles.
        Amplitude, temperature and mass come from the ``discretization`` block.

        Example:
        | ${f0} =    `Sample Initial Ensemble`    2000    seed=7
        """
        disc = self.config.discretization
        count = disc.particles if particles is None else int(particles)
        ensemble = sample_initial_ensemble(
            count,
            self._stream(seed, replica, 0, StreamPurpose.initial_state),
            disc.amplitude,
            disc.temperature,
            disc.mass,
        )
        logger.debug(f"Sampled {count} particles for replica {replica}")
        return ensemble

    @keyword(tags=("Setter", "Particles"))
    def create_ensemble(
        self, positions: Any, velocities: Any, weights: Optional[List[float]] = None
    ) -> ParticleEnsemble:
        """Creates an ensemble from explicit ``positions`` and ``velocities``.

        ``weights`` Defaults to ``1 / n`` for each of the ``n`` particles.
        """
        x = as_points(positions)
        w = np.full(len(x), 1.0 / max(len(x), 1)) if weights is None else np.asarray(weights, dtype=float)
        return ParticleEnsemble(x, as_points(velocities), w)

    @keyword(tags=("Getter", "Particles"))
    def rotate_magnetic(
        self, velocities: Any, magnetic: Optional[float] = None, dt: Optional[float] = None
    ) -> List[List[float]]:
        """Rotates ``velocities`` by the exact flow of ``dv/dt = B v × e3`` over ``dt``.

        Defaults come from ``physical.magnetic`` and ``discretization.dt``.
        """
        b = self.config.physical.magnetic if magnetic is None else float(magnetic)
        step = self.config.discretization.dt if dt is None else float(dt)
        return rotate_magnetic(as_points(velocities), b, step).tolist()

    @keyword(tags=("Setter", "Particles"))
    def step_common_noise(
        self,
        ensemble: ParticleEnsemble,
        spec: Optional[NoiseSpec],
        step: int = 0,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        replica: int = 0,
    ) -> ParticleEnsemble:
        """Advances ``ensemble`` by one split step driven by the common field ``spec``.

        The noise draw is keyed by ``(seed, replica, step)``. Renewal specs are
        integrated exactly over ``[step dt, (step + 1) dt]``.
        ``spec`` ``None`` gives the noise-free step.
        """
        cfg = self._step_config(dt)
        if spec is not None and spec.variant is NoiseVariant.Renewal:
            process = RenewalProcess(spec, self.config.seed if seed is None else int(seed), int(replica))
            return step_common_noise(ensemble, None, cfg, renewal=process, time=int(step) * cfg.dt)
        rng = self._stream(seed, replica, step, StreamPurpose.noise)
        return step_common_noise(ensemble, spec, cfg, rng=rng)

    @keyword(tags=("Setter", "Particles"))
    def step_independent_noise(
        self,
        ensemble: ParticleEnsemble,
        kappa: Optional[float] = None,
        step: int = 0,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        replica: int = 0,
    ) -> ParticleEnsemble:
        """Advances ``ensemble`` by one split step with independent kicks ``√(2κ dt) η_i``.

        ``kappa`` Defaults to the configured ``κ``.
        """
        value = self.config.kappa if kappa is None else float(kappa)
        rng = self._stream(seed, replica, step, StreamPurpose.noise)
        return step_independent_noise(ensemble, value, self._step_config(dt), rng=rng)

    @keyword(tags=("Particles",))
    def run_trajectory(
        self, mode: SteppingMode = SteppingMode.common, replica: int = 0, family_index: Optional[int] = None
    ) -> RunRecord:
        """Runs one replica of the active config to the horizon.

        ``mode`` ``common`` for the particle system with transport noise,
        ``independent`` for the mean-field limit.

        Stepping errors do not fail the keyword; the record is returned with
        status ``failed`` and a diagnostic.

        Example:
        | ${record} =    `Run Trajectory`    independent    replica=3
        | Should Be Equal    ${record.status}    ok
        """
        return run_trajectory(self.config, mode, int(replica), family_index=family_index)

    @keyword(tags=("Particles",))
    def run_replicas(
        self,
        mode: SteppingMode = SteppingMode.common,
        first: int = 0,
        last: Optional[int] = None,
        family_index: Optional[int] = None,
    ) -> List[RunRecord]:
        """Runs replicas ``first..last`` (inclusive) on the library worker pool.

        ``last`` Defaults to ``statistics.replicas - 1``.
        """
        end = self.config.statistics.replicas - 1 if last is None else int(last)
        ids = list(range(int(first), end + 1))
        return run_replicas(self.config, mode, ids, self.workers, family_index=family_index)

    @keyword(tags=("Getter", "Assertion", "Particles"))
    def get_jacobian_determinant(
        self,
        base_point: List[float],
        spec: Optional[NoiseSpec] = None,
        seed: Optional[int] = None,
        horizon: Optional[float] = None,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``|det DΦ_t|`` of the discrete flow at ``(x, v) = base_point``.

        Twelve displaced copies follow one frozen noise path of ``spec``, in
        the field of the initial density. The flow preserves phase-space volume,
        so the value is close to ``1``.

        Example:
        | ${det} =    `Get Jacobian Determinant`    [0.1, 0, 0, 0.5, 0, 0]    ${spec}
        | Should Be True    abs(${det} - 1) < 1e-3
        """
        disc = self.config.discretization
        background = DensityGrid.from_function(initial_density(disc.amplitude, disc.mass), disc.grid)
        value = jacobian_probe(
            self.config.step_config(),
            spec,
            self.config.seed if seed is None else int(seed),
            base_point,
            h=self.config.statistics.probe_size,
            horizon=disc.horizon if horizon is None else float(horizon),
            background=background,
        )
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Jacobian determinant is", message
        )

    @keyword(tags=("Particles",))
    def write_run_record(self, record: RunRecord) -> List[Path]:
        """Writes ``record`` as CSV and JSON below ``runs/`` of the output directory."""
        return self.writer.write_record(record)
