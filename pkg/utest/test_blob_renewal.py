import numpy as np
import pytest

from StochasticVlasov.errors import ConfigurationError
from StochasticVlasov.simulation.blob_profile import BlobProfile, blob_chi, blob_chi_closed_form
from StochasticVlasov.simulation.noise_model import blob_noise, covariance_pairing
from StochasticVlasov.simulation.renewal import (
    Blob,
    RenewalProcess,
    blob_pairing,
    blob_pairing_quadrature,
    draw_blob,
    renewal_time_integral,
    sample_renewal_field,
)
from StochasticVlasov.simulation.statistics import variance_ci
from StochasticVlasov.simulation.torus_kernel import DensityGrid
from StochasticVlasov.utils.data_types import AmplitudeLaw, BlobShape, NoiseVariant

TAU = 0.01
KT2 = 60.0


@pytest.fixture(scope="module")
def renewal_spec():
    return blob_noise(TAU, KT2, 0.05, BlobProfile(), mode_cutoff=2, renewal=True)


@pytest.fixture
def blob():
    return Blob(0.7, 0.06, np.array([0.1, -0.2, 0.3]))


def test_bump_profile_transform_at_zero_is_its_mass():
    assert BlobProfile(radius=0.2, mass=2.5).fourier(0.0) == pytest.approx(2.5, rel=1e-12)


def test_profile_validation():
    with pytest.raises(ConfigurationError):
        BlobProfile(radius=0.5)
    with pytest.raises(ConfigurationError):
        BlobProfile(mass=0.0)


def test_gaussian_chi_matches_closed_form():
    profile = BlobProfile(BlobShape.gaussian, 0.1, 1.0)
    for mode in ([1, 0, 0], [1, 1, 0], [2, 1, 1]):
        assert blob_chi(mode, 0.05, profile) == pytest.approx(blob_chi_closed_form(mode, 0.05, profile), rel=1e-7)
    with pytest.raises(ConfigurationError):
        blob_chi_closed_form([1, 0, 0], 0.05, BlobProfile())


def test_chi_tends_to_profile_mass():
    profile = BlobProfile()
    errors = [abs(blob_chi([1, 1, 0], ell, profile) - 1.0) for ell in (0.2, 0.05, 0.01)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_chi_validation():
    with pytest.raises(ConfigurationError):
        blob_chi([0, 0, 0], 0.05, BlobProfile())
    with pytest.raises(ConfigurationError):
        blob_chi([1, 0, 0], 0.3, BlobProfile())


def test_two_point_amplitude_has_blob_variance(renewal_spec):
    rng = np.random.default_rng(1)
    for _ in range(20):
        drawn = draw_blob(renewal_spec, rng)
        assert drawn.amplitude**2 == pytest.approx(renewal_spec.sigma2, rel=1e-12)
        assert 0.05 <= drawn.scale <= 0.1
        assert np.all(np.abs(drawn.center) <= 0.5)


def test_amplitude_mean_must_fit_second_moment():
    spec = blob_noise(TAU, KT2, 0.05, mode_cutoff=2, amplitude_law=AmplitudeLaw.gaussian, amplitude_mean=1e6)
    with pytest.raises(ConfigurationError):
        draw_blob(spec, np.random.default_rng(0))


@pytest.mark.parametrize("mode", [[1, 0, 0], [1, 1, 0], [0, 2, 0], [2, 1, 0]])
def test_blob_pairing_closed_form_matches_quadrature(renewal_spec, blob, mode):
    amplitude = [1.0, 0.5, -0.25]
    closed = blob_pairing(renewal_spec, blob, mode, amplitude)
    assert closed == pytest.approx(blob_pairing_quadrature(renewal_spec, blob, mode, amplitude), abs=1e-12)


def test_renewal_field_is_piecewise_constant(renewal_spec):
    process = RenewalProcess(renewal_spec, seed=3, replica=1)
    points = np.array([[0.0, 0.1, 0.2], [-0.3, 0.4, 0.0]])
    assert np.allclose(process.field(points, 0.0), process.field(points, 0.0099))
    assert not np.allclose(process.field(points, 0.0), process.field(points, 0.01))
    kick = process.kick(points, 0.005, 0.015)
    expected = 0.005 * process.field(points, 0.0) + 0.005 * process.field(points, 0.01)
    assert np.allclose(kick, expected, atol=1e-14)


def test_renewal_blobs_are_keyed_by_interval(renewal_spec):
    first = RenewalProcess(renewal_spec, seed=3, replica=1).blob(4)
    again = RenewalProcess(renewal_spec, seed=3, replica=1).blob(4)
    other = RenewalProcess(renewal_spec, seed=3, replica=2).blob(4)
    assert first.amplitude == again.amplitude and np.array_equal(first.center, again.center)
    assert not np.array_equal(first.center, other.center)


def test_renewal_process_needs_renewal_spec():
    spec = blob_noise(TAU, KT2, 0.05, mode_cutoff=2)
    assert spec.variant is NoiseVariant.Blob
    with pytest.raises(ConfigurationError):
        RenewalProcess(spec, 0, 0)


def test_sample_renewal_field_on_aligned_times(renewal_spec):
    points = np.array([[0.1, 0.1, 0.1]])
    values = sample_renewal_field(renewal_spec, [0.0, 0.01, 0.01, 0.03], points, np.random.default_rng(2))
    assert values.shape == (4, 1, 3)
    assert np.array_equal(values[1], values[2])
    with pytest.raises(ConfigurationError):
        sample_renewal_field(renewal_spec, [0.0, 0.015], points, np.random.default_rng(2))


def test_time_integral_variance_approaches_covariance_pairing(renewal_spec):
    horizon = 0.05
    mode = np.array([1, 1, 0])
    amplitude = np.array([1.0, 0.0, 0.5])
    points = DensityGrid(6, np.zeros((6, 6, 6))).points()
    test = np.cos(2.0 * np.pi * points @ mode)[:, np.newaxis] * amplitude
    rng = np.random.default_rng(17)
    pairings = [
        np.mean(np.sum(renewal_time_integral(renewal_spec, horizon, points, rng) * test, axis=1))
        for _ in range(1500)
    ]
    estimate = variance_ci(pairings, level=0.9999)
    assert estimate.covers(horizon * covariance_pairing(renewal_spec, mode, amplitude))
    with pytest.raises(ConfigurationError):
        renewal_time_integral(renewal_spec, 0.015, points, rng)
