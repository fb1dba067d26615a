import numpy as np
import pytest
from approvaltests.approvals import verify_all  # type: ignore

from StochasticVlasov.errors import ConfigurationError
from StochasticVlasov.simulation.blob_profile import BlobProfile
from StochasticVlasov.simulation.noise_model import (
    blob_noise,
    canonical_coefficients,
    canonical_noise,
    covariance_at,
    covariance_grid,
    covariance_lr_norm,
    covariance_pairing,
    covariance_table,
    increment_cube,
    sample_field_increments,
    sample_increment_batch,
    spectral_noise,
)
from StochasticVlasov.utils.data_types import BlobShape, NoiseVariant

KAPPA = 0.1


@pytest.fixture(scope="module")
def blob_spec():
    return blob_noise(0.01, 60.0, 0.05, BlobProfile(BlobShape.bump, 0.25, 1.0), mode_cutoff=2)


def test_canonical_modes_of_first_member():
    spec = canonical_noise(KAPPA, 1)
    verify_all("Canonical modes N=1", [tuple(int(c) for c in k) for k in spec.modes])


@pytest.mark.parametrize("family_index", [1, 2, 3, 4])
def test_canonical_single_point_covariance(family_index):
    spec = canonical_noise(KAPPA, family_index, 4)
    assert np.allclose(covariance_at(spec, [0.0, 0.0, 0.0]), 2 * KAPPA * np.eye(3), rtol=0, atol=1e-13)
    assert spec.trace == pytest.approx(6 * KAPPA, rel=1e-13)
    assert len(spec.modes) == ((2 * family_index + 1) ** 3 - 1) // 2
    assert np.allclose(spec.weights, spec.weights[0])


def test_canonical_coefficients_are_normalized():
    coefficients = canonical_coefficients(2, 4)
    assert coefficients.retained == 124
    assert coefficients.l2_norm == pytest.approx(1.0, rel=1e-14)
    assert coefficients.linf_norm == pytest.approx(1 / np.sqrt(124), rel=1e-14)


def test_canonical_l2_norm_meets_shrinkage_bound():
    for family_index in (1, 2, 3):
        spec = canonical_noise(KAPPA, family_index, 3)
        bound = 6 * KAPPA * canonical_coefficients(family_index, 3).linf_norm
        assert covariance_lr_norm(spec, 2.0) <= bound * (1 + 1e-12)


def test_lr_norms_decrease_along_the_family():
    norms = [covariance_lr_norm(canonical_noise(KAPPA, n, 4), 7 / 4) for n in (1, 2, 3, 4)]
    assert all(later < earlier for earlier, later in zip(norms, norms[1:]))


def test_parseval_norm_matches_grid_quadrature():
    spec = canonical_noise(KAPPA, 2, 2)
    grid = covariance_grid(spec, 10)
    quadrature = np.sqrt(np.mean(np.sum(grid**2, axis=(-2, -1))))
    assert covariance_lr_norm(spec, 2.0) == pytest.approx(quadrature, rel=1e-12)


def test_covariance_grid_matches_pointwise_covariance():
    spec = canonical_noise(KAPPA, 1, 2)
    grid = covariance_grid(spec, 6)
    node = np.array([2, 5, 1])
    x = -0.5 + node / 6
    assert np.allclose(grid[tuple(node)], covariance_at(spec, x), atol=1e-14)
    with pytest.raises(ConfigurationError):
        covariance_grid(spec, 3)


def test_covariance_pairing():
    spec = canonical_noise(KAPPA, 1)
    weight = 6 * KAPPA / 13
    assert covariance_pairing(spec, [1, 0, 0], [1.0, 0.0, 0.0]) == pytest.approx(weight / 4, rel=1e-13)
    assert covariance_pairing(spec, [-1, -1, 0], [1.0, 1.0, 0.0]) == pytest.approx(weight / 2, rel=1e-13)
    assert covariance_pairing(spec, [1, 0, 0], [0.0, 1.0, 0.0]) == 0.0
    assert covariance_pairing(spec, [2, 0, 0], [1.0, 0.0, 0.0]) == 0.0


def test_increments_from_cube_and_batch_agree():
    spec = canonical_noise(KAPPA, 2, 3)
    rng = np.random.default_rng(5)
    normals = rng.standard_normal((3, 2 * len(spec.modes)))
    points = rng.uniform(-0.5, 0.5, size=(10, 3))
    batch = sample_increment_batch(spec, points, 0.01, normals)
    for draw in range(3):
        single = sample_field_increments(spec, points, 0.01, normals=normals[draw])
        assert np.allclose(batch[draw], single, atol=1e-13)


def test_increment_variance_at_a_point():
    spec = canonical_noise(KAPPA, 1)
    normals = np.random.default_rng(21).standard_normal((40000, 2 * len(spec.modes)))
    samples = sample_increment_batch(spec, [[0.1, 0.2, -0.3]], 0.5, normals)[:, 0, :]
    variance = np.var(samples, axis=0)
    assert np.allclose(variance, 2 * KAPPA * 0.5, rtol=0.05)


def test_increment_cube_needs_enough_normals():
    spec = canonical_noise(KAPPA, 1)
    with pytest.raises(ValueError):
        increment_cube(spec, np.zeros(5), 0.01)
    with pytest.raises(ValueError):
        sample_field_increments(spec, [[0.0, 0.0, 0.0]], 0.01)
    with pytest.raises(ConfigurationError):
        sample_field_increments(spec, [[0.0, 0.0, 0.0]], 0.0, normals=np.zeros(26))


def test_canonical_validation():
    with pytest.raises(ConfigurationError):
        canonical_noise(0.0, 1)
    with pytest.raises(ConfigurationError):
        canonical_coefficients(3, 2)
    with pytest.raises(ConfigurationError):
        canonical_coefficients(0, 2)


def test_spectral_noise_moves_modes_to_half_lattice():
    spec = spectral_noise(KAPPA, [[1, 0, 0], [0, -1, 0], [0, 0, 2]], [1.0, 1.0, 1.0])
    assert spec.modes.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 2]]
    assert np.allclose(covariance_at(spec, np.zeros(3)), 2 * KAPPA * np.eye(3))
    with pytest.raises(ConfigurationError):
        spectral_noise(KAPPA, [[0, 0, 0]], [1.0])


def test_with_kappa_rescales_weights():
    spec = canonical_noise(KAPPA, 2)
    doubled = spec.with_kappa(2 * KAPPA)
    assert doubled.trace == pytest.approx(12 * KAPPA)
    assert np.allclose(doubled.weights, 2 * spec.weights)
    with pytest.raises(ConfigurationError):
        spec.with_kappa(-1.0)


def test_blob_noise_covariance(blob_spec):
    assert blob_spec.variant is NoiseVariant.Blob
    assert blob_spec.kappa == pytest.approx(KAPPA)
    assert np.allclose(covariance_at(blob_spec, np.zeros(3)), 2 * KAPPA * np.eye(3), atol=1e-13)
    assert np.all(np.sum(blob_spec.modes**2, axis=1) <= 4)
    assert np.all(blob_spec.chis > 0)
    assert blob_spec.label == "blob l_N=0.05"


def test_blob_noise_validation():
    with pytest.raises(ConfigurationError):
        blob_noise(0.0, 60.0, 0.05)
    with pytest.raises(ConfigurationError):
        blob_noise(0.01, -1.0, 0.05)
    with pytest.raises(ConfigurationError):
        blob_noise(0.01, 60.0, 0.3, mode_cutoff=1)


def test_covariance_table_rows_add_up_to_single_point_covariance(blob_spec):
    rows = covariance_table(blob_spec)
    assert len(rows) == len(blob_spec.modes)
    assert sum(row["q11"] for row in rows) == pytest.approx(2 * KAPPA)
    assert sum(row["q12"] for row in rows) == pytest.approx(0.0, abs=1e-14)
    assert sum(row["lambda"] for row in rows) == pytest.approx(6 * KAPPA)
    assert rows[0]["gamma"] == ""
    assert covariance_table(canonical_noise(KAPPA, 1))[0]["chi"] == ""
