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
from typing import Any, List, Optional, Union

from assertionengine import AssertionOperator, float_str_verify_assertion

from ..base import LibraryComponent
from ..simulation.initial_state import initial_density
from ..simulation.particle_sde import ParticleEnsemble
from ..simulation.torus_kernel import (
    DensityGrid,
    SpectralKernel,
    build_kernel,
    deposit_density,
    field_at_points,
    potential_energy,
)
from ..utils import as_mode, as_points, keyword, logger

DensitySource = Union[DensityGrid, ParticleEnsemble]


class TorusKernel(LibraryComponent):
    @keyword(tags=("Setter", "Kernel"))
    def build_kernel(
        self,
        mode_cutoff: Optional[int] = None,
        delta: Optional[float] = None,
        coulomb_sign: Optional[float] = None,
    ) -> SpectralKernel:
        """Builds the mollified Green kernel on the unit torus.

        ``mode_cutoff`` Field modes ``0 < |k|∞ <= K`` that are kept. Defaults to
        ``discretization.field_cutoff`` of the active config.

        ``delta`` Mollifier width; coefficients are damped by ``exp(-δ²|k|²)``.
        Defaults to ``physical.delta``.

        ``coulomb_sign`` ``1`` for the repulsive and ``-1`` for the attractive
        interaction. Defaults to ``physical.coulomb_sign``.

        Kernels are cached by their arguments.

        Example:
        | ${kernel} =    `Build Kernel`    4    0.05
        | ${E} =    `Get Field At Points`    ${grid}    ${kernel}    [[0.25, 0, 0]]
        """
        cutoff = self.config.discretization.field_cutoff if mode_cutoff is None else int(mode_cutoff)
        width = self.config.physical.delta if delta is None else float(delta)
        sign = self.config.physical.coulomb_sign if coulomb_sign is None else float(coulomb_sign)
        key = ("kernel", cutoff, width, sign)
        return self.spec_cache.get_or_create(key, lambda: build_kernel(cutoff, width, sign))

    @keyword(tags=("Getter", "Assertion", "Kernel"))
    def get_green_coefficient(
        self,
        kernel: SpectralKernel,
        mode: List[int],
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns the Fourier coefficient ``Ĝ(k)`` of the mollified Green function.

        ``mode`` Lattice mode ``k`` as three integers; ``k = 0`` gives ``0``.

        Optionally asserts the value, see `Assertions`.

        Example:
        | `Get Green Coefficient`    ${kernel}    [1, 0, 0]    >    0
        """
        value = kernel.green_coefficient(as_mode(mode))
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, f"Green coefficient of {list(mode)} is", message
        )

    @keyword(tags=("Getter", "Kernel"))
    def deposit_density(self, ensemble: ParticleEnsemble, resolution: Optional[int] = None) -> DensityGrid:
        """Deposits the ensemble onto an ``n³`` grid with cloud-in-cell weights.

        ``resolution`` Grid size ``n``. Defaults to ``discretization.grid``.
        """
        n = self.config.discretization.grid if resolution is None else int(resolution)
        grid = deposit_density(ensemble.positions, ensemble.weights, n)
        logger.debug(f"Deposited {ensemble.count} particles on a {n}^3 grid, mass {grid.total_mass}")
        return grid

    @keyword(tags=("Getter", "Kernel"))
    def initial_density_grid(
        self,
        resolution: Optional[int] = None,
        amplitude: Optional[float] = None,
        mass: Optional[float] = None,
    ) -> DensityGrid:
        """Samples the spatial density ``mass (1 + a cos(2π x1))`` of the initial state on grid nodes.

        Arguments default to ``discretization.grid``, ``discretization.amplitude``
        and ``discretization.mass``.
        """
        disc = self.config.discretization
        function = initial_density(
            disc.amplitude if amplitude is None else float(amplitude),
            disc.mass if mass is None else float(mass),
        )
        return DensityGrid.from_function(function, disc.grid if resolution is None else int(resolution))

    @keyword(tags=("Getter", "Kernel"))
    def get_field_at_points(self, source: DensitySource, kernel: SpectralKernel, points: Any) -> List[List[float]]:
        """Returns the electric field ``E = ∇G * ρ`` at ``points``.

        ``source`` A density grid or a particle ensemble.

        ``points`` One 3-vector or a list of them.
        """
        return field_at_points(source, kernel, as_points(points)).tolist()

    @keyword(tags=("Getter", "Assertion", "Kernel"))
    def get_potential_energy(
        self,
        source: DensitySource,
        kernel: SpectralKernel,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns the interaction energy ``V = -Σ Ĝ(k) |ρ̂(k)|²`` of ``source``.

        Optionally asserts the value, see `Assertions`.
        """
        value = potential_energy(source, kernel)
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Potential energy is", message
        )
