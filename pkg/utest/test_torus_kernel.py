import numpy as np
import pytest

from StochasticVlasov.errors import ConfigurationError
from StochasticVlasov.simulation.particle_sde import ParticleEnsemble
from StochasticVlasov.simulation.torus_kernel import (
    DensityGrid,
    build_kernel,
    deposit_density,
    field_at_points,
    grid_structure_factor,
    lattice_modes,
    mollifier_density,
    positive_half,
    potential_energy,
    spectral_curl,
    structure_factor,
    synthesize,
    wrap,
)

AMPLITUDE = 0.3
DELTA = 0.05


@pytest.fixture(scope="module")
def kernel():
    return build_kernel(4, DELTA)


@pytest.fixture
def cosine_grid():
    return DensityGrid.from_function(
        lambda x1, x2, x3: 1.0 + AMPLITUDE * np.cos(2.0 * np.pi * x1) + 0.0 * (x2 + x3), 16
    )


def test_lattice_modes_and_half_lattice():
    modes = lattice_modes(1)
    assert modes.shape == (26, 3)
    assert np.count_nonzero(positive_half(modes)) == 13
    assert not np.any(np.all(modes == 0, axis=1))


def test_green_coefficients(kernel):
    assert kernel.green_coefficient([0, 0, 0]) == 0.0
    assert kernel.green_coefficient([1, 0, 0]) == pytest.approx(np.exp(-(DELTA**2)), rel=1e-14)
    assert kernel.green_coefficient([1, -1, 0]) == pytest.approx(np.exp(-2 * DELTA**2) / 2, rel=1e-14)
    with pytest.raises(ConfigurationError):
        kernel.green_coefficient([5, 0, 0])


def test_attractive_kernel_flips_sign():
    attractive = build_kernel(2, DELTA, -1)
    assert attractive.green_coefficient([0, 1, 0]) == pytest.approx(-np.exp(-(DELTA**2)), rel=1e-14)


@pytest.mark.parametrize(
    "cutoff, delta, sign",
    [(0, 0.05, 1), (1.5, 0.05, 1), (2, 0.0, 1), (2, 0.5, 1), (2, 0.05, 2)],
)
def test_build_kernel_rejects_invalid_arguments(cutoff, delta, sign):
    with pytest.raises(ConfigurationError):
        build_kernel(cutoff, delta, sign)


def test_field_of_cosine_density(kernel, cosine_grid):
    field = field_at_points(cosine_grid, kernel, np.array([[0.25, 0.0, 0.0], [0.0, 0.3, -0.1]]))
    peak = -2.0 * np.pi * AMPLITUDE * np.exp(-(DELTA**2))
    assert np.allclose(field, [[peak, 0.0, 0.0], [0.0, 0.0, 0.0]], atol=1e-10)


def test_potential_energy_of_cosine_density(kernel, cosine_grid):
    expected = -np.exp(-(DELTA**2)) * AMPLITUDE**2 / 2.0
    assert potential_energy(cosine_grid, kernel) == pytest.approx(expected, rel=1e-10)


def test_field_is_bounded(kernel, cosine_grid):
    points = np.random.default_rng(3).uniform(-0.5, 0.5, size=(200, 3))
    field = field_at_points(cosine_grid, kernel, points)
    assert np.max(np.linalg.norm(field, axis=1)) <= kernel.field_bound(cosine_grid.total_mass)


def test_grid_resolution_must_resolve_cutoff(cosine_grid):
    with pytest.raises(ConfigurationError):
        grid_structure_factor(DensityGrid(8, np.ones((8, 8, 8))), 4)
    assert grid_structure_factor(cosine_grid, 7).shape == (15, 15, 15)


def test_single_particle_structure_factor():
    cube = structure_factor(np.array([[0.1, 0.2, 0.3]]), np.array([1.0]), 2)
    nonzero = np.ones(cube.shape, dtype=bool)
    nonzero[2, 2, 2] = False
    assert np.allclose(np.abs(cube[nonzero]), 1.0)
    assert cube[2, 2, 2] == 0


def test_particle_and_grid_sources_agree_for_lattice_particles(kernel):
    n = 16
    grid = DensityGrid(n, np.zeros((n, n, n)))
    points = grid.points()
    weights = np.full(len(points), 1.0 / len(points))
    ensemble = ParticleEnsemble(points, np.zeros_like(points), weights)
    deposited = deposit_density(points, weights, n)
    assert np.allclose(deposited.values, 1.0)
    assert potential_energy(ensemble, kernel) == pytest.approx(0.0, abs=1e-20)
    assert potential_energy(deposited, kernel) == pytest.approx(0.0, abs=1e-20)


def test_cloud_in_cell_conserves_mass():
    rng = np.random.default_rng(11)
    positions = rng.uniform(-2.0, 2.0, size=(500, 3))
    grid = deposit_density(positions, np.full(500, 0.002), 8)
    assert grid.total_mass == pytest.approx(1.0, rel=1e-12)
    assert np.all(grid.values >= 0)


def test_deposit_rejects_coarse_grid_and_empty_ensemble():
    with pytest.raises(ConfigurationError):
        deposit_density(np.zeros((1, 3)), np.ones(1), 3)
    with pytest.raises(ConfigurationError):
        deposit_density(np.zeros((0, 3)), np.zeros(0), 8)


def test_mollifier_density_is_a_probability_density_with_gaussian_transform():
    x = -0.5 + np.arange(256) / 256
    values = mollifier_density(DELTA, x)
    assert np.mean(values) == pytest.approx(1.0, rel=1e-9)
    assert np.mean(values * np.cos(2.0 * np.pi * x)) == pytest.approx(np.exp(-(DELTA**2)), rel=1e-9)
    assert np.mean(values * np.cos(6.0 * np.pi * x)) == pytest.approx(np.exp(-9 * DELTA**2), rel=1e-9)


def test_gradient_field_has_no_curl(kernel):
    assert np.allclose(spectral_curl(kernel.coeffs), 0.0)


def test_synthesize_single_mode():
    coeffs = np.zeros((1, 3, 3, 3), dtype=complex)
    coeffs[0, 2, 1, 1] = 0.5
    coeffs[0, 0, 1, 1] = 0.5
    points = np.array([[0.0, 0.0, 0.0], [0.25, 0.1, 0.2], [0.5, 0.0, 0.0]])
    assert np.allclose(synthesize(coeffs, points)[:, 0], [1.0, 0.0, -1.0])


def test_wrap_maps_into_unit_cell():
    assert np.allclose(wrap(np.array([0.6, -0.7, 0.2, -0.5])), [-0.4, 0.3, 0.2, -0.5])


def pairwise_field(positions, weights, points, cutoff, delta, sign=1.0):
    field = np.zeros((len(points), 3))
    for k in lattice_modes(cutoff):
        k_squared = float(k @ k)
        green = sign * np.exp(-(delta**2) * k_squared) / k_squared
        for x_j, w_j in zip(positions, weights):
            phase = 2.0 * np.pi * (points - x_j) @ k
            field += w_j * (-2.0 * np.pi * green) * np.sin(phase)[:, np.newaxis] * k[np.newaxis]
    return field


@pytest.fixture
def cloud():
    rng = np.random.default_rng(21)
    positions = rng.uniform(-0.5, 0.5, size=(48, 3))
    return ParticleEnsemble(positions, np.zeros_like(positions), rng.uniform(0.5, 1.5, 48) / 48)


def test_field_matches_pairwise_sum(cloud):
    kernel = build_kernel(2, DELTA)
    points = np.random.default_rng(22).uniform(-0.5, 0.5, size=(10, 3))
    expected = pairwise_field(cloud.positions, cloud.weights, points, 2, DELTA)
    assert np.allclose(field_at_points(cloud, kernel, points), expected, rtol=1e-10, atol=1e-12)
    attractive = build_kernel(2, DELTA, -1)
    assert np.allclose(field_at_points(cloud, attractive, points), -expected, rtol=1e-10, atol=1e-12)


def test_two_particle_forces_are_opposite(kernel):
    first = ParticleEnsemble([[0.1, -0.2, 0.3]], [[0.0, 0.0, 0.0]], [0.3])
    second = ParticleEnsemble([[-0.35, 0.05, 0.2]], [[0.0, 0.0, 0.0]], [0.7])
    on_first = first.weights[0] * field_at_points(second, kernel, first.positions)
    on_second = second.weights[0] * field_at_points(first, kernel, second.positions)
    assert np.linalg.norm(on_first) > 0
    assert np.allclose(on_first, -on_second, atol=1e-13)


def test_potential_energy_grows_with_regularization(cloud):
    deltas = [0.02, 0.05, 0.1, 0.2, 0.4]
    repulsive = [potential_energy(cloud, build_kernel(4, delta)) for delta in deltas]
    attractive = [potential_energy(cloud, build_kernel(4, delta, -1)) for delta in deltas]
    assert np.all(np.diff(repulsive) > 0)
    assert np.all(np.diff(attractive) < 0)
    assert all(value < 0 for value in repulsive)


def test_potential_energy_is_translation_invariant(kernel, cloud):
    shifted = ParticleEnsemble(wrap(cloud.positions + [0.37, -0.81, 0.12]), cloud.velocities, cloud.weights)
    assert potential_energy(shifted, kernel) == pytest.approx(potential_energy(cloud, kernel), rel=1e-10)


def test_particle_on_a_node_deposits_only_there():
    n = 8
    node = np.array([2, 3, 5])
    grid = deposit_density((-0.5 + node / n)[np.newaxis], np.array([0.25]), n)
    expected = np.zeros((n, n, n))
    expected[tuple(node)] = 0.25 * n**3
    assert np.allclose(grid.values, expected)


def test_particle_at_a_cell_center_splits_evenly():
    n = 8
    node = np.array([6, 0, 7])
    grid = deposit_density((-0.5 + (node + 0.5) / n)[np.newaxis], np.array([1.0]), n)
    expected = np.zeros((n, n, n))
    for corner in np.ndindex(2, 2, 2):
        expected[tuple((node + corner) % n)] = n**3 / 8
    assert np.allclose(grid.values, expected)
    assert np.count_nonzero(grid.values) == 8
