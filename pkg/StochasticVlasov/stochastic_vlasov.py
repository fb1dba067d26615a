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
import os
from pathlib import Path
from typing import List, Optional

from assertionengine import AssertionOperator, Formatter
from overrides import overrides
from robotlibcore import DynamicCore  # type: ignore

from .base import SpecCache
from .keywords import (
    Configuration,
    Diagnostics,
    NoiseModel,
    ParticleDynamics,
    ScalingExperiment,
    TorusKernel,
    Verification,
)
from .simulation.experiment_config import ExperimentConfig, default_config, load_config, with_overrides
from .simulation.run_record import ArtifactWriter
from .simulation.statistics import DEFAULT_CI_LEVEL
from .simulation.verification import CheckResult
from .utils import NoiseVariant, logger
from .version import __version__ as VERSION


class StochasticVlasov(DynamicCore):
    """StochasticVlasov is a Robot Framework library for particle experiments with
    the stochastic Vlasov equation on the three dimensional unit torus.

    The library samples weighted particles from a perturbed Maxwellian, advances
    them in a self-consistent electric field and a constant magnetic field, and
    drives their velocities with a random transport noise. Every particle either
    feels the same spatially correlated noise field (``common`` mode) or its own
    Brownian motion (``independent`` mode, the mean-field limit). The keywords
    measure how the common-noise system approaches the limit as the noise
    correlation shrinks, and check the invariants the dynamics must satisfy.

    == Table of contents ==

    %TOC%

    = Experiment config =

    A run is fully determined by one JSON document with the blocks
    ``physical``, ``noise``, ``discretization``, ``statistics``, ``seeds`` and
    ``output``. Every field has a default. The config is loaded with
    `Load Experiment Config` or given as the ``config`` library argument, and
    changed with `Update Experiment Config`. Each value remembers whether it came
    from the file, a default, was derived, was overridden or came from the
    ``STOCHVLASOV_OUTPUT_DIR`` environment variable, see `Get Config Provenance`.

    The noise strength satisfies ``κ = τ k_T² / 6``; any two of the three values
    determine the third.

    = Noise families =

    %NOISE_VARIANTS%

    Every member ``N`` of a family has the same single-point covariance
    ``Q_N(0) = 2κ I``, so one particle sees the same velocity diffusion for all
    ``N``. Larger ``N`` decorrelates the field between particles.

    = Reproducibility =

    Random draws come from counter-based streams keyed by the master seed, the
    replica id, the step and the purpose of the draw. Results therefore do not
    depend on the number of ``workers`` or the order in which replicas finish,
    and with common random numbers different family members share their draws.

    = Assertions =

    Keywords that return a number can optionally assert it. The assertion
    operator and the expected value follow the returned value's arguments.

    %ASSERTION_TABLE%

    Check keywords, such as `Check Energy Identity`, fail with a summary of the
    report and record a verdict that `Write Verification Report` collects.

    = Example =

    | ***** Settings *****
    | Library    StochasticVlasov    config=${CURDIR}/canonical.json    workers=4
    |
    | ***** Test Cases *****
    | Energy Balance
    |     ${records} =    `Run Replicas`    common
    |     `Check Energy Identity`    ${records}
    |     `Write Verification Report`
    """

    ROBOT_LIBRARY_VERSION = VERSION
    ROBOT_LIBRARY_SCOPE = "GLOBAL"

    def __init__(
        self,
        config: Optional[str] = None,
        output_dir: Optional[str] = None,
        workers: Optional[int] = None,
        ci_level: float = DEFAULT_CI_LEVEL,
    ):
        """StochasticVlasov library can be taken into use with optional arguments:

        - ``config`` <str>
          Path to an experiment config JSON file. Without it every field takes its default.
        - ``output_dir`` <str>
          Directory for run records, tables and reports. Overrides ``output.directory``.
        - ``workers`` <int>
          Size of the thread pool that runs replicas. Defaults to the number of CPUs.
        - ``ci_level`` <float>
          Confidence level of the intervals used by check keywords.
        """
        base = load_config(config) if config else default_config()
        self.config: ExperimentConfig = with_overrides(base, output_dir=output_dir) if output_dir else base
        self.workers = int(workers) if workers else os.cpu_count()
        self.ci_level = float(ci_level)
        self._spec_cache = SpecCache()
        self._verdicts: List[CheckResult] = []
        self._writer: Optional[ArtifactWriter] = None
        libraries: List[object] = [
            Configuration(self),
            Diagnostics(self),
            Formatter(self),
            NoiseModel(self),
            ParticleDynamics(self),
            ScalingExperiment(self),
            TorusKernel(self),
            Verification(self),
        ]
        self._keyword_formatters: dict = {}
        DynamicCore.__init__(self, libraries)
        logger.debug(f"StochasticVlasov {VERSION} writes to {self.output_dir}")

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output.directory)

    @property
    def writer(self) -> ArtifactWriter:
        output = self.config.output
        writer = self._writer
        wanted = (Path(output.directory), tuple(output.formats))
        if writer is None or (writer.directory, tuple(writer.formats)) != wanted:
            writer = self._writer = ArtifactWriter(output.directory, output.formats)
        return writer

    @overrides
    def get_keyword_documentation(self, name):
        doc = DynamicCore.get_keyword_documentation(self, name)
        if name == "__intro__":
            doc = doc.replace("%ASSERTION_TABLE%", AssertionOperator.__doc__)
            doc = doc.replace("%NOISE_VARIANTS%", NoiseVariant.__doc__)
        return doc
