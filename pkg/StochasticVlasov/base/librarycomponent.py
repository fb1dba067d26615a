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
from typing import TYPE_CHECKING, List, Optional

from ..simulation.experiment_config import ExperimentConfig
from ..simulation.run_record import ArtifactWriter
from ..simulation.verification import CheckResult

if TYPE_CHECKING:
    from ..stochastic_vlasov import StochasticVlasov


class LibraryComponent:
    def __init__(self, library: "StochasticVlasov") -> None:
        """Base class exposing attributes from the common context.

        :param library: The library itself as a context object.
        """
        self.library = library

    @property
    def config(self) -> ExperimentConfig:
        return self.library.config

    @config.setter
    def config(self, value: ExperimentConfig):
        self.library.config = value

    @property
    def workers(self) -> Optional[int]:
        return self.library.workers

    @property
    def ci_level(self) -> float:
        return self.library.ci_level

    @property
    def output_dir(self) -> Path:
        return Path(self.library.output_dir)

    @property
    def writer(self) -> ArtifactWriter:
        return self.library.writer

    @property
    def spec_cache(self):
        return self.library._spec_cache

    @property
    def verdicts(self) -> List[CheckResult]:
        return self.library._verdicts

    @property
    def keyword_formatters(self) -> dict:
        return self.library._keyword_formatters
