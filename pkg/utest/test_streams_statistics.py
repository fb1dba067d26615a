import json

import numpy as np
import pytest
from approvaltests.approvals import verify  # type: ignore

from StochasticVlasov.errors import StatisticalError
from StochasticVlasov.simulation.statistics import mean_ci, require_samples, t_value, variance_ci, z_value
from StochasticVlasov.simulation.streams import StreamPurpose, provenance, refined_normals, stream


def test_streams_are_reproducible_and_separated():
    first = stream(1, 2, 3, StreamPurpose.noise).standard_normal(5)
    again = stream(1, 2, 3, StreamPurpose.noise).standard_normal(5)
    assert np.array_equal(first, again)
    for other in (
        stream(1, 2, 4, StreamPurpose.noise),
        stream(1, 3, 3, StreamPurpose.noise),
        stream(1, 2, 3, StreamPurpose.renewal),
        stream(2, 2, 3, StreamPurpose.noise),
    ):
        assert not np.array_equal(first, other.standard_normal(5))


def test_stream_key_must_be_non_negative():
    with pytest.raises(ValueError):
        stream(1, -1, 0, StreamPurpose.noise)


def test_refined_normals_aggregate_fine_draws():
    coarse = refined_normals(5, 0, 3, (4,), draws_per_step=2)
    fine = [stream(5, 0, index, StreamPurpose.noise).standard_normal((4,)) for index in (6, 7)]
    assert np.allclose(coarse, (fine[0] + fine[1]) / np.sqrt(2))
    assert np.array_equal(refined_normals(5, 0, 3, (4,)), stream(5, 0, 3, StreamPurpose.noise).standard_normal((4,)))


def test_stream_provenance():
    verify(json.dumps(provenance(20240601, 3), indent=4) + "\n")


def test_z_value():
    assert z_value(0.9973) == pytest.approx(3.0, abs=1e-3)
    assert z_value(0.95) == pytest.approx(1.959964, rel=1e-6)
    with pytest.raises(ValueError):
        z_value(1.0)


def test_t_value_is_wider_than_normal_for_few_degrees_of_freedom():
    assert t_value(0.95, 2) == pytest.approx(4.302653, rel=1e-6)
    assert t_value(0.95, 1000) == pytest.approx(z_value(0.95), rel=1e-2)
    with pytest.raises(StatisticalError):
        t_value(0.95, 0)


def test_mean_ci_of_a_sample():
    estimate = mean_ci([1.0, 2.0, 3.0, 4.0], level=0.95)
    assert estimate.mean == 2.5
    assert estimate.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert estimate.covers(2.5 + estimate.halfwidth * 0.99)
    assert not estimate.covers(estimate.upper + 1e-9)
    assert estimate.to_dict()["samples"] == 4


def test_mean_ci_along_an_axis():
    mean, stderr, halfwidth = mean_ci(np.array([[1.0, 0.0], [3.0, 0.0]]))
    assert mean.tolist() == [2.0, 0.0]
    assert stderr[1] == 0.0 and halfwidth[0] > 0


def test_too_few_samples():
    with pytest.raises(StatisticalError):
        mean_ci([1.0])
    with pytest.raises(StatisticalError):
        variance_ci([1.0, 2.0, 3.0])
    with pytest.raises(StatisticalError):
        require_samples(3, 32, "Quadratic variation")


def test_variance_ci_covers_known_variance():
    samples = np.random.default_rng(4).normal(0.0, 2.0, size=20000)
    assert variance_ci(samples).covers(4.0)
