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


class ConfigurationError(ValueError):
    """Invalid parameter, config document or resolution."""


class BudgetExceededError(ConfigurationError):
    """Planned work exceeds the configured particle-step ceiling."""


class NumericalError(RuntimeError):
    """Quadrature did not converge or a probe matrix is degenerate."""


class StatisticalError(RuntimeError):
    """Not enough replicas or rows for the requested statistic."""
