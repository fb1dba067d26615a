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
import numpy as np

from ..errors import ConfigurationError
from .particle_sde import ParticleEnsemble

NEWTON_ITERATIONS = 40


def inverse_cdf_x1(uniform: np.ndarray, amplitude: float) -> np.ndarray:
    """Invert ``F(x) = x + 1/2 + a sin(2 pi x) / (2 pi)`` on ``[-1/2, 1/2)``."""
    x = uniform - 0.5
    for _ in range(NEWTON_ITERATIONS):
        residual = x + 0.5 + amplitude * np.sin(2.0 * np.pi * x) / (2.0 * np.pi) - uniform
        x = np.clip(x - residual / (1.0 + amplitude * np.cos(2.0 * np.pi * x)), -0.5, 0.5)
    return x


def sample_initial_ensemble(
    count: int,
    rng: np.random.Generator,
    amplitude: float = 0.1,
    temperature: float = 1.0,
    mass: float = 1.0,
) -> ParticleEnsemble:
    """Equal-weight sample of ``f0 = mass (1 + a cos(2 pi x1)) M_theta(v)``."""
    if count < 1:
        raise ConfigurationError(f"Particle count must be positive, got {count}")
    if not 0.0 <= amplitude < 1.0:
        raise ConfigurationError(f"Density amplitude must lie in [0, 1), got {amplitude}")
    if temperature <= 0 or mass <= 0:
        raise ConfigurationError("Temperature and mass must be positive")
    positions = np.empty((count, 3))
    positions[:, 0] = inverse_cdf_x1(rng.random(count), amplitude)
    positions[:, 1:] = rng.uniform(-0.5, 0.5, size=(count, 2))
    velocities = np.sqrt(temperature) * rng.standard_normal((count, 3))
    return ParticleEnsemble(positions, velocities, np.full(count, mass / count))


def initial_density(amplitude: float, mass: float = 1.0):
    """Spatial density ``mass (1 + a cos(2 pi x1))`` as a callable of grid coordinates."""

    def density(x1, x2, x3):
        return mass * (1.0 + amplitude * np.cos(2.0 * np.pi * x1)) + 0.0 * (x2 + x3)

    return density
