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
from typing import Dict, List, Optional

from ..base import LibraryComponent
from ..simulation.verification import CHECKS, CheckResult, VerificationReport, run_verification
from ..utils import CheckStatus, find_by_name, keyword, logger


class Verification(LibraryComponent):
    @keyword(tags=("Assertion", "Verification"))
    def run_verification_suite(self, *checks: str, fail_on_error: bool = True) -> VerificationReport:
        """Runs the invariant checks of the active config and records their verdicts.

        ``checks`` Names of checks to run; all of them when none is given. Available:
        ``covariance_exactness``, ``trace_identity``, ``covariance_shrinkage``,
        ``chi_limit``, ``noise_statistics``, ``velocity_growth``,
        ``energy_identity``, ``liouville``, ``interpolation`` and ``determinism``.

        ``fail_on_error`` Fails the keyword when any check does not pass.

        A check that raises is recorded as ``ERROR`` and the others still run.

        Example:
        | `Run Verification Suite`    covariance_exactness    liouville
        """
        report = run_verification(self.config, self.workers, list(checks) or None)
        self.verdicts.extend(report.checks)
        if fail_on_error and not report.passed:
            names = ", ".join(f"{check.name} ({check.status.name})" for check in report.failed)
            raise AssertionError(f"Verification failed: {names}")
        return report

    @keyword(tags=("Getter", "Verification"))
    def get_available_checks(self) -> List[str]:
        """Returns the names accepted by `Run Verification Suite`."""
        return list(CHECKS)

    @keyword(tags=("Getter", "Verification"))
    def get_recorded_verdicts(self, name: Optional[str] = None) -> List[Dict]:
        """Returns recorded verdicts as dictionaries with ``name``, ``status``, ``message`` and ``details``.

        ``name`` Returns only the latest verdict of that check, as a one-item list.
        """
        verdicts = [check.to_dict() for check in self.verdicts]
        if name is None:
            return verdicts
        try:
            return [find_by_name(name, list(reversed(verdicts)), log_error=False)]
        except StopIteration:
            return []

    @keyword(tags=("Verification",))
    def clear_recorded_verdicts(self):
        """Forgets every verdict recorded so far."""
        self.verdicts.clear()

    @keyword(tags=("Verification",))
    def write_verification_report(self, name: str = "verification_report.json") -> Path:
        """Writes every recorded verdict to ``name`` in the output directory.

        The report passes only if at least one verdict is recorded and none is ``FAIL`` or ``ERROR``.
        """
        report = VerificationReport(list(self.verdicts))
        path = self.writer.write_json(name, report.to_dict())
        failed = [check for check in self.verdicts if check.status is not CheckStatus.PASS]
        logger.info(f"{len(self.verdicts)} verdicts, {len(failed)} not passed, written to {path}")
        return path
