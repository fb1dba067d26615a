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
import json
import time
from typing import Any, Dict

import wrapt  # type: ignore

from .simulation.verification import CheckResult
from .utils import logger
from .utils.data_types import CheckStatus
from .utils.meta_python import to_plain


def _summary(report: Any) -> Dict:
    if hasattr(report, "to_dict"):
        return to_plain(report.to_dict())
    return to_plain(report) if isinstance(report, dict) else {"value": to_plain(report)}


@wrapt.decorator
def with_check_recording(wrapped, instance, args, kwargs):
    """Turn a returned report into a verdict.

    The wrapped keyword returns a report with a ``passed`` attribute. A failed
    report raises ``AssertionError``; every outcome, errors included, is
    appended to the library verdicts used by `Write Verification Report`.
    """
    name = wrapped.__name__
    start = time.time()
    try:
        logger.stash_this_thread()
        try:
            report = wrapped(*args, **kwargs)
        except AssertionError as error:
            instance.verdicts.append(CheckResult(name, CheckStatus.FAIL, str(error)))
            raise
        except Exception as error:
            instance.verdicts.append(CheckResult(name, CheckStatus.ERROR, f"{type(error).__name__}: {error}"))
            raise
        details = _summary(report)
        passed = bool(getattr(report, "passed", details.get("passed", False)))
        status = CheckStatus.PASS if passed else CheckStatus.FAIL
        instance.verdicts.append(CheckResult(name, status, "", details))
        if not passed:
            raise AssertionError(
                f"{name} failed:\n{json.dumps(details, indent=2, sort_keys=True, default=str)}"
            )
        return report
    finally:
        logger.flush_and_delete_thread_stash()
        logger.debug(f"Check statistics: {name} finished in {time.time() - start:.3f} seconds")
