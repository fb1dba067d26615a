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
"""Coulomb kernel on the unit torus ``[-1/2, 1/2)^3`` in Fourier space.

Fourier convention is ``f(x) = sum_k f_k exp(2 pi i k.x)``. Spectral quantities
are stored as cubes indexed by ``k + K`` along each axis, ``k`` in ``[-K, K]``;
the ``k = 0`` entry is always zero.
"""
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from ..errors import ConfigurationError

TWO_PI = 2.0 * np.pi
STRUCTURE_FACTOR_CHUNK = 8192
SYNTHESIS_CHUNK = 2048


def wavenumbers(cutoff: int) -> np.ndarray:
    return np.arange(-cutoff, cutoff + 1)


def lattice_cube(cutoff: int) -> np.ndarray:
    """Integer modes of the cube ``|k|_inf <= cutoff`` with shape ``(3, n, n, n)``."""
    axis = wavenumbers(cutoff)
    return np.stack(np.meshgrid(axis, axis, axis, indexing="ij"))


def squared_norms(cutoff: int) -> np.ndarray:
    return np.sum(lattice_cube(cutoff) ** 2, axis=0)


def lattice_modes(cutoff: int) -> np.ndarray:
    """All ``k`` with ``0 < |k|_inf <= cutoff`` as rows, in cube order."""
    cube = lattice_cube(cutoff).reshape(3, -1).T
    return cube[np.any(cube != 0, axis=1)]


def positive_half(modes: np.ndarray) -> np.ndarray:
    """Mask of modes whose first nonzero coordinate is positive."""
    modes = np.asarray(modes)
    first = np.where(modes[:, 0] != 0, modes[:, 0], np.where(modes[:, 1] != 0, modes[:, 1], modes[:, 2]))
    return first > 0


def mollifier(delta: float, k_squared: np.ndarray) -> np.ndarray:
    return np.exp(-(delta**2) * k_squared)


def mollifier_density(delta: float, x: Any, images: int = 3) -> np.ndarray:
    """Real-space periodic density whose Fourier coefficients are ``exp(-delta^2 |k|^2)``.

    Works per axis on any array of coordinates; the 3D density is the product
    over axes.
    """
    width = delta / (np.pi * np.sqrt(2.0))
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for shift in range(-images, images + 1):
        total += np.exp(-((x + shift) ** 2) / (2.0 * width**2))
    return total / np.sqrt(2.0 * np.pi * width**2)


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    mode_cutoff: int
    delta: float
    coulomb_sign: float
    green: np.ndarray
    coeffs: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.mode_cutoff + 1

    @property
    def modes(self) -> np.ndarray:
        return lattice_modes(self.mode_cutoff)

    def _index(self, k) -> tuple:
        k = np.asarray(k, dtype=int)
        if np.max(np.abs(k)) > self.mode_cutoff:
            raise ConfigurationError(
                f"Mode {k.tolist()} is outside the kernel cutoff K={self.mode_cutoff}"
            )
        return tuple(k + self.mode_cutoff)

    def coefficient(self, k) -> np.ndarray:
        """Fourier coefficient of the gradient kernel at ``k`` as a complex 3-vector."""
        return self.coeffs[(slice(None),) + self._index(k)]

    def green_coefficient(self, k) -> float:
        return float(self.green[self._index(k)])

    def field_bound(self, total_mass: float) -> float:
        """Upper bound of ``|E(x)|`` for any nonnegative density of the given mass."""
        magnitudes = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))
        return float(abs(total_mass) * np.sum(magnitudes))


def build_kernel(mode_cutoff: int, delta: float, coulomb_sign: float = 1.0) -> SpectralKernel:
    if int(mode_cutoff) != mode_cutoff or mode_cutoff < 1:
        raise ConfigurationError(f"Mode cutoff K must be a positive integer, got {mode_cutoff}")
    if not 0.0 < delta < 0.5:
        raise ConfigurationError(f"Regularization length must satisfy 0 < delta < 1/2, got {delta}")
    if coulomb_sign not in (1, -1):
        raise ConfigurationError(f"Coulomb sign must be +1 or -1, got {coulomb_sign}")
    cutoff = int(mode_cutoff)
    cube = lattice_cube(cutoff)
    k_squared = np.sum(cube**2, axis=0)
    green = np.zeros(k_squared.shape)
    nonzero = k_squared > 0
    green[nonzero] = coulomb_sign * mollifier(delta, k_squared[nonzero]) / k_squared[nonzero]
    coeffs = 1j * TWO_PI * cube * green[np.newaxis]
    return SpectralKernel(cutoff, float(delta), float(coulomb_sign), green, coeffs)


@dataclass(eq=False)
class DensityGrid:
    """Cell-node values of a spatial density on an ``n^3`` periodic grid.

    Node ``i`` sits at ``-1/2 + i/n`` on each axis.
    """

    resolution: int
    values: np.ndarray

    @property
    def spacing(self) -> float:
        return 1.0 / self.resolution

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.values) * self.cell_volume)

    def node_coordinates(self) -> np.ndarray:
        return -0.5 + np.arange(self.resolution) * self.spacing

    def points(self) -> np.ndarray:
        axis = self.node_coordinates()
        mesh = np.meshgrid(axis, axis, axis, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    @classmethod
    def from_function(cls, function, resolution: int) -> "DensityGrid":
        """Sample ``function(x1, x2, x3)`` on the grid nodes."""
        axis = -0.5 + np.arange(resolution) / resolution
        mesh = np.meshgrid(axis, axis, axis, indexing="ij")
        return cls(resolution, np.asarray(function(*mesh), dtype=float))


def wrap(positions: np.ndarray) -> np.ndarray:
    return np.mod(positions + 0.5, 1.0) - 0.5


def deposit_density(positions: np.ndarray, weights: np.ndarray, resolution: int) -> DensityGrid:
    """Cloud-in-cell deposition of weighted particles onto the periodic grid."""
    if resolution < 4:
        raise ConfigurationError(f"Grid resolution must be at least 4, got {resolution}")
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if positions.shape[0] == 0:
        raise ConfigurationError("Cannot deposit an empty ensemble")
    scaled = (wrap(positions) + 0.5) * resolution
    lower = np.floor(scaled)
    fraction = scaled - lower
    lower = lower.astype(int) % resolution
    values = np.zeros((resolution,) * 3)
    for corner in np.ndindex(2, 2, 2):
        offset = np.asarray(corner)
        share = np.prod(np.where(offset == 1, fraction, 1.0 - fraction), axis=1)
        index = (lower + offset) % resolution
        np.add.at(values, (index[:, 0], index[:, 1], index[:, 2]), weights * share)
    return DensityGrid(resolution, values * resolution**3)


def _axis_phases(coordinates: np.ndarray, cutoff: int, sign: float) -> np.ndarray:
    return np.exp(sign * 1j * TWO_PI * np.outer(coordinates, wavenumbers(cutoff)))


def structure_factor(positions: np.ndarray, weights: np.ndarray, cutoff: int) -> np.ndarray:
    """Exact ``rho_k = sum_j w_j exp(-2 pi i k.x_j)`` over the cube ``|k|_inf <= cutoff``."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    size = 2 * cutoff + 1
    cube = np.zeros((size,) * 3, dtype=complex)
    for start in range(0, positions.shape[0], STRUCTURE_FACTOR_CHUNK):
        chunk = slice(start, start + STRUCTURE_FACTOR_CHUNK)
        px, py, pz = (_axis_phases(positions[chunk, axis], cutoff, -1.0) for axis in range(3))
        cube += np.einsum("p,pa,pb,pc->abc", weights[chunk], px, py, pz, optimize=True)
    cube[cutoff, cutoff, cutoff] = 0.0
    return cube


def grid_structure_factor(grid: DensityGrid, cutoff: int) -> np.ndarray:
    n = grid.resolution
    if n < 2 * cutoff + 2:
        raise ConfigurationError(
            f"Grid resolution {n} aliases modes up to K={cutoff}; need at least {2 * cutoff + 2}"
        )
    transform = np.fft.fftn(grid.values) * grid.cell_volume
    k = wavenumbers(cutoff)
    sub = transform[np.ix_(k % n, k % n, k % n)]
    parity = np.where(np.sum(lattice_cube(cutoff), axis=0) % 2 == 0, 1.0, -1.0)
    cube = sub * parity
    cube[cutoff, cutoff, cutoff] = 0.0
    return cube


DensitySource = Union[DensityGrid, Any]


def density_transform(source: DensitySource, cutoff: int) -> np.ndarray:
    """Fourier coefficients of a grid density or of a weighted particle ensemble."""
    if isinstance(source, DensityGrid):
        return grid_structure_factor(source, cutoff)
    return structure_factor(source.positions, source.weights, cutoff)


def synthesize(coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_k c_k exp(2 pi i k.x)`` at points for a ``(d, n, n, n)`` coefficient cube.

    Returns a complex ``(len(points), d)`` array.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    cutoff = (coeffs.shape[-1] - 1) // 2
    values = np.empty((points.shape[0], coeffs.shape[0]), dtype=complex)
    for start in range(0, points.shape[0], SYNTHESIS_CHUNK):
        chunk = slice(start, start + SYNTHESIS_CHUNK)
        px, py, pz = (_axis_phases(points[chunk, axis], cutoff, 1.0) for axis in range(3))
        values[chunk] = np.einsum("dabc,pa,pb,pc->pd", coeffs, px, py, pz, optimize=True)
    return values


def field_at_points(source: DensitySource, kernel: SpectralKernel, points: np.ndarray) -> np.ndarray:
    """Electric field ``E = grad G^delta * rho`` at the given torus positions."""
    rho = density_transform(source, kernel.mode_cutoff)
    return synthesize(kernel.coeffs * rho[np.newaxis], points).real


def potential_energy(source: DensitySource, kernel: SpectralKernel) -> float:
    """``V_delta = - sum_k G_k |rho_k|^2`` over the retained modes."""
    rho = density_transform(source, kernel.mode_cutoff)
    return float(-np.sum(kernel.green * np.abs(rho) ** 2))


def spectral_curl(coeffs: np.ndarray) -> np.ndarray:
    """Fourier coefficients of ``curl`` for a ``(3, n, n, n)`` vector field cube."""
    cutoff = (coeffs.shape[-1] - 1) // 2
    return 1j * TWO_PI * np.cross(lattice_cube(cutoff), coeffs, axis=0)
