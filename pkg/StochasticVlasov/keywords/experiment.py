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
from typing import Any, List, Optional

from assertionengine import AssertionOperator, float_str_verify_assertion

from ..assertion_engine import with_check_recording
from ..base import LibraryComponent
from ..simulation.diagnostics import Observable
from ..simulation.run_record import RunRecord
from ..simulation.scaling_experiment import (
    ROW_HEADER,
    ConvergenceTable,
    SelfConvergenceReport,
    SweepPlan,
    TrendReport,
    heat_kernel_observable,
    limit_self_convergence,
    martingale_trend,
    noise_floor,
    run_sweep,
)
from ..utils import ObservableSpec, convert_typed_dict, is_truthy, keyword, logger


class ScalingExperiment(LibraryComponent):
    def _write_records(self, label: str, records: List[RunRecord]):
        for record in records:
            self.writer.write_record(record, f"runs/{label}")

    @keyword(tags=("Experiment",))
    def run_sweep(self, with_noise_floor: bool = True, write_runs: bool = False) -> ConvergenceTable:
        """Runs the family sweep of the active config against the independent-noise limit.

        Every member ``N`` of ``noise.family_indices`` is run with common noise
        on ``statistics.replicas`` replicas; each row holds the normalized
        observable error, the martingale variance and the covariance norms.
        The table is written as ``convergence_table.csv`` and ``convergence_table.json``.

        ``with_noise_floor`` Also runs the ``κ = 0`` pair that sets the error floor.

        ``write_runs`` Writes every run record below ``runs/<row>/``.

        The particle-step budget and the covariance of every member are checked
        before anything runs.

        Example:
        | ${table} =    `Run Sweep`
        | Should Be True    ${table.non_increasing()}
        """
        plan = SweepPlan.from_config(self.config)
        table = run_sweep(plan, self.workers, on_records=self._write_records if is_truthy(write_runs) else None)
        if is_truthy(with_noise_floor):
            table.noise_floor = noise_floor(self.config, self.workers)
        self.writer.write_csv("convergence_table.csv", ROW_HEADER, table.csv_rows())
        self.writer.write_json("convergence_table.json", table.to_dict())
        logger.info(f"Sweep of {len(table.rows)} rows written to {self.output_dir}")
        return table

    @keyword(tags=("Assertion", "Experiment"))
    @with_check_recording
    def check_martingale_trend(self, table: ConvergenceTable) -> TrendReport:
        """Fails unless ``log mart_var`` grows with ``log ||Q_N||_{L^7/4}`` beyond its confidence interval.

        The fit is written as ``martingale_trend.json``. Degenerate tables,
        with identical norms or non-positive entries, fail with a reason.
        """
        report = martingale_trend(table, self.ci_level)
        self.writer.write_json("martingale_trend.json", report.to_dict())
        return report

    @keyword(tags=("Assertion", "Experiment"))
    @with_check_recording
    def check_limit_self_convergence(self) -> SelfConvergenceReport:
        """Fails unless the mean-field limit converges in ``dt``, in ``P`` and against the heat kernel.

        Runs the independent mode at ``dt``, ``dt/2`` and ``dt/4`` on shared
        Brownian paths, at ``P`` and ``4P`` particles, and field-free with
        ``B = 0`` where the observables are known in closed form.
        """
        report = limit_self_convergence(self.config, self.workers)
        self.writer.write_json("limit_self_convergence.json", report.to_dict())
        return report

    @keyword(tags=("Getter", "Assertion", "Experiment"))
    def get_noise_floor(
        self,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns the error between noiseless common and ``κ = 0`` independent runs.

        Optionally asserts the value, see `Assertions`.
        """
        err, err_ci = noise_floor(self.config, self.workers)
        logger.info(f"Noise floor {err:.6g} ± {err_ci:.3g}")
        return float_str_verify_assertion(err, assertion_operator, assertion_expected, "Noise floor is", message)

    @keyword(tags=("Getter", "Assertion", "Experiment"))
    def get_heat_kernel_observable(
        self,
        observable: ObservableSpec,
        t: float,
        kappa: Optional[float] = None,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``<f_t, φ>`` of field-free streaming with velocity diffusion ``κ``.

        The initial state is the configured ``f0``. ``kappa`` defaults to the configured ``κ``.
        """
        spec = convert_typed_dict({"observable": ObservableSpec}, {"observable": observable})["observable"]
        disc = self.config.discretization
        value = heat_kernel_observable(
            Observable.from_dict(spec),
            float(t),
            self.config.kappa if kappa is None else float(kappa),
            disc.amplitude,
            disc.temperature,
            disc.mass,
        )
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Heat kernel observable is", message
        )
