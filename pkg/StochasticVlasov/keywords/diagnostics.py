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
from typing import Any, List, Optional, Sequence

from assertionengine import AssertionOperator, float_str_verify_assertion

from ..assertion_engine import with_check_recording
from ..base import LibraryComponent
from ..simulation.diagnostics import (
    EnergyLedger,
    InequalityReport,
    Observable,
    PhaseSpaceGrid,
    SeriesReport,
    calibrate_splitting_bias,
    compact_velocity_marginal_check,
    density_lp_norm,
    energy_identity_check,
    energy_identity_residual,
    interpolation_bound_check,
    interpolation_exponent,
    kinetic_energy,
    kinetic_growth_check,
    martingale_qv_check,
    observable_value,
    phase_space_histogram,
)
from ..simulation.particle_sde import ParticleEnsemble
from ..simulation.run_record import RunRecord
from ..simulation.torus_kernel import DensityGrid
from ..utils import ObservableSpec, VelocityBox, convert_typed_dict, keyword, logger


def _ledgers(records: Sequence[Any]) -> List[EnergyLedger]:
    ledgers = []
    for item in records:
        if isinstance(item, RunRecord):
            if item.failed:
                continue
            item = item.ledger
        ledgers.append(item)
    return ledgers


class Diagnostics(LibraryComponent):
    @keyword(tags=("Getter", "Assertion", "Diagnostics"))
    def get_kinetic_energy(
        self,
        ensemble: ParticleEnsemble,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``K = Σ w_i |v_i|²`` of the ensemble.

        Optionally asserts the value, see `Assertions`.
        """
        return float_str_verify_assertion(
            kinetic_energy(ensemble), assertion_operator, assertion_expected, "Kinetic energy is", message
        )

    @keyword(tags=("Getter", "Assertion", "Diagnostics"))
    def get_observable_value(
        self,
        ensemble: ParticleEnsemble,
        observable: ObservableSpec,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``<f, φ> = Σ w_i φ(x_i, v_i)``.

        ``observable`` A dictionary with ``mode``, ``center``, ``width`` and ``kind``,
        see `ObservableSpec`. A width of ``inf`` drops the velocity window.

        Example:
        | &{phi} =    Create Dictionary    mode=${{[1, 0, 0]}}    width=1.0
        | `Get Observable Value`    ${f0}    ${phi}    >    0
        """
        spec = convert_typed_dict({"observable": ObservableSpec}, {"observable": observable})["observable"]
        value = observable_value(ensemble, Observable.from_dict(spec))
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Observable value is", message
        )

    @keyword(tags=("Getter", "Diagnostics"))
    def get_energy_residual(self, record: RunRecord) -> List[float]:
        """Returns ``K + V - (K + V)(0) - 6κ t W`` at every recorded time of ``record``."""
        return energy_identity_residual(record.ledger).tolist()

    @keyword(tags=("Getter", "Assertion", "Diagnostics"))
    def get_density_lp_norm(
        self,
        grid: DensityGrid,
        p: float,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``||ρ||_p`` of a grid density; ``p`` may be ``inf``."""
        return float_str_verify_assertion(
            density_lp_norm(grid, float(p)), assertion_operator, assertion_expected, f"L^{p} norm is", message
        )

    @keyword(tags=("Getter", "Diagnostics"))
    def create_phase_space_histogram(
        self,
        ensemble: ParticleEnsemble,
        spatial: Optional[int] = None,
        velocity: Optional[int] = None,
        extent: Optional[float] = None,
    ) -> PhaseSpaceGrid:
        """Bins the ensemble into a six-dimensional density.

        Velocities outside ``[-extent, extent]³`` are not binned; their weight
        is kept as ``outside_mass``. Defaults come from the ``statistics`` block.
        """
        stats = self.config.statistics
        grid = phase_space_histogram(
            ensemble,
            stats.histogram_spatial if spatial is None else int(spatial),
            stats.histogram_velocity if velocity is None else int(velocity),
            stats.histogram_extent if extent is None else float(extent),
        )
        if grid.outside_mass > 0:
            logger.debug(f"Histogram left mass {grid.outside_mass:g} outside the velocity box")
        return grid

    @keyword(tags=("Getter", "Diagnostics"))
    def get_interpolation_exponent(self, p: float) -> float:
        """Returns the density exponent ``r(p)`` of the interpolation bound; ``r(inf) = 5/3``."""
        return interpolation_exponent(float(p))

    @keyword(tags=("Assertion", "Diagnostics"))
    @with_check_recording
    def check_interpolation_bound(self, grid: PhaseSpaceGrid, p: float) -> InequalityReport:
        """Fails unless ``||ρ||_r <= C ||f||_p^a K(f)^b`` holds for ``grid``.

        ``p`` Phase-space exponent above ``1``; ``inf`` is allowed.
        """
        return interpolation_bound_check(grid, float(p))

    @keyword(tags=("Assertion", "Diagnostics"))
    @with_check_recording
    def check_compact_velocity_marginal(self, grid: PhaseSpaceGrid, box: VelocityBox, p: float) -> InequalityReport:
        """Fails unless the density of velocities in ``box`` satisfies ``||ρ_K||_p <= |K|^(1/p') ||f||_p``.

        Example:
        | &{box} =    Create Dictionary    lower=${{[-1, -1, -1]}}    upper=${{[1, 1, 1]}}
        | `Check Compact Velocity Marginal`    ${grid}    ${box}    2
        """
        limits = convert_typed_dict({"box": VelocityBox}, {"box": box})["box"]
        return compact_velocity_marginal_check(grid, limits["lower"], limits["upper"], float(p))

    @keyword(tags=("Assertion", "Diagnostics"))
    @with_check_recording
    def check_energy_identity(
        self, records: List[Any], bias_records: Optional[List[Any]] = None
    ) -> SeriesReport:
        """Fails unless the replica mean of the energy residual is zero within its confidence interval.

        ``records`` Run records or energy ledgers of one config; failed records are skipped.

        ``bias_records`` Optional ``κ = 0`` runs of the same config. Their mean
        residual is the splitting error and is subtracted first.
        """
        bias = calibrate_splitting_bias(_ledgers(bias_records)) if bias_records else None
        return energy_identity_check(_ledgers(records), bias, self.ci_level)

    @keyword(tags=("Assertion", "Diagnostics"))
    @with_check_recording
    def check_martingale_quadratic_variation(
        self, records: List[Any], bias_records: Optional[List[Any]] = None
    ) -> SeriesReport:
        """Fails unless ``E[M_t²] <= 24 κ W ∫ E[K] ds`` at every recorded time.

        Needs at least 32 successful replicas.
        """
        bias = calibrate_splitting_bias(_ledgers(bias_records)) if bias_records else None
        return martingale_qv_check(_ledgers(records), bias=bias, ci_level=self.ci_level)

    @keyword(tags=("Assertion", "Diagnostics"))
    @with_check_recording
    def check_kinetic_growth(self, records: List[Any]) -> SeriesReport:
        """Fails unless ``E K(t) - K(0) = 6 κ t W`` for field-free runs."""
        return kinetic_growth_check(_ledgers(records), self.ci_level)

    @keyword(tags=("Diagnostics",))
    def write_series_report(self, report: SeriesReport, name: Optional[str] = None):
        """Writes a check report as ``<name>.csv`` with columns ``t``, ``statistic``, ``bound`` and ``ci``."""
        stem = name or report.name
        return self.writer.write_csv(f"{stem}.csv", ["t", "statistic", "bound", "ci"], report.rows())
