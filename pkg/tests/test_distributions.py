import math

import numpy as np
import pytest
from scipy import stats

from nnstabz import distributions
from nnstabz.distributions import (DensityBoundRule, GaussianEllipsoid, QuerySpec, SlabMixture, SpectrumRule,
                                   UniformCube)
from nnstabz.montecarlo import derive_stream

ALPHA = 0.001


def test_uniform_marginals_pass_chi_square():
    points = distributions.sample_many(UniformCube(dimension=4), derive_stream(1, 0), 20000)
    assert points.shape == (20000, 4)
    assert points.min() >= 0 and points.max() < 1
    for column in range(4):
        observed, _ = np.histogram(points[:, column], bins=20, range=(0.0, 1.0))
        _, p_value = stats.chisquare(observed)
        assert p_value > ALPHA, f'coordinate {column} fails uniformity (p={p_value:.2e})'


def test_slab_mixture_puts_extra_mass_on_the_slab():
    spec = SlabMixture(dimension=8, weight=0.5)
    points = distributions.sample_many(spec, derive_stream(2, 0), 20000)
    share = np.mean(points[:, 0] <= 1.0 / 8)
    assert share == pytest.approx(0.5 + 0.5 / 8, abs=0.02)
    # the other coordinates stay uniform
    assert np.mean(points[:, 1] <= 1.0 / 8) == pytest.approx(1.0 / 8, abs=0.02)


def joint_chi_square(points, bins, expected_share):
    observed, _ = np.histogramdd(points, bins=bins, range=[(0.0, 1.0)] * points.shape[1])
    expected = len(points) * expected_share
    return stats.chisquare(observed.ravel(), expected.ravel()).pvalue


def test_uniform_joint_histogram_passes_chi_square():
    points = distributions.sample_many(UniformCube(dimension=2), derive_stream(41, 0), 1000000)
    assert joint_chi_square(points, 10, np.full((10, 10), 0.01)) > ALPHA


def test_slab_mixture_joint_histogram_passes_chi_square():
    spec = SlabMixture(dimension=3, weight=0.5)
    points = distributions.sample_many(spec, derive_stream(43, 0), 1000000)
    # six bins per axis; the first two along axis 0 make up the slab x_0 <= 1/3
    level = np.where(np.arange(6) < 2, 2.0, 0.5)
    share = np.broadcast_to(level[:, None, None], (6, 6, 6)) / 216.0
    assert joint_chi_square(points, 6, share) > ALPHA


def test_gaussian_joint_histogram_passes_chi_square():
    spec = distributions.make_gaussian(2, spectrum=[2.0, 0.5], mean=[1.0, -1.0])
    points = distributions.sample_many(spec, derive_stream(47, 0), 1000000)
    probabilities = stats.norm.cdf((points - spec.mean) / spec.stddevs)
    assert joint_chi_square(probabilities, 10, np.full((10, 10), 0.01)) > ALPHA


@pytest.mark.parametrize('d', [2, 8, 32])
def test_slab_density_integrates_to_one(d):
    spec = SlabMixture(dimension=d, weight=0.5)
    count = 100000
    values = distributions.density(spec, derive_stream(3, d).random((count, d)))
    standard_error = math.sqrt((distributions.l2_density_norm_squared(spec) - 1.0) / count)
    assert abs(np.mean(values) - 1.0) <= 3.0 * standard_error


@pytest.mark.parametrize('spec', [UniformCube(dimension=4), SlabMixture(dimension=2, weight=0.9),
                                  SlabMixture(dimension=8, weight=0.5, axis=3), SlabMixture(dimension=32, weight=0.1)])
def test_density_never_exceeds_its_supremum(spec):
    stream = derive_stream(53, spec.dimension)
    points = np.vstack([stream.uniform(-0.1, 1.1, (50000, spec.dimension)),
                        distributions.sample_many(spec, stream, 50000)])
    assert distributions.density(spec, points).max() <= distributions.density_sup(spec)


def test_density_suprema_and_l2_norms():
    slab = SlabMixture(dimension=8, weight=0.5)
    assert distributions.density_sup(UniformCube(dimension=5)) == 1.0
    assert distributions.density_sup(slab) == pytest.approx(4.5)
    assert distributions.l2_density_norm_squared(UniformCube(dimension=5)) == 1.0
    assert distributions.l2_density_norm_squared(slab) == pytest.approx(2.75)
    with pytest.raises(ValueError):
        distributions.density_sup(distributions.make_gaussian(3))


def test_density_values():
    cube = UniformCube(dimension=2)
    assert distributions.density(cube, np.array([0.3, 0.7])) == 1.0
    assert distributions.density(cube, np.array([1.3, 0.7])) == 0.0
    assert distributions.density(cube, np.array([[0.1, 0.1], [2.0, 0.0]])).tolist() == [1.0, 0.0]
    gaussian = distributions.make_gaussian(1)
    assert distributions.density(gaussian, np.array([0.0])) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))
    with pytest.raises(ValueError):
        distributions.density(cube, np.array([0.5]))


@pytest.mark.parametrize('spec', [UniformCube(dimension=3), SlabMixture(dimension=3, weight=0.3, axis=2),
                                  distributions.make_gaussian(3, SpectrumRule('power', 0.5))])
def test_sampling_is_deterministic_and_prefix_stable(spec):
    long_draw = distributions.sample_many(spec, derive_stream(9, (0, 1)), 10)
    short_draw = distributions.sample_many(spec, derive_stream(9, (0, 1)), 4)
    np.testing.assert_array_equal(long_draw[:4], short_draw)
    other_lane = distributions.sample_many(spec, derive_stream(9, (0, 2)), 4)
    assert not np.array_equal(short_draw, other_lane)


def test_spectrum_rules():
    np.testing.assert_array_equal(SpectrumRule('ones').build(4), np.ones(4))
    np.testing.assert_allclose(SpectrumRule('power', 0.5).build(4), [1.0, 1 / math.sqrt(2), 1 / math.sqrt(3), 0.5])
    np.testing.assert_allclose(SpectrumRule('power', 1.0, scale=2.0).build(3), [2.0, 1.0, 2.0 / 3.0])
    with pytest.raises(ValueError):
        SpectrumRule('flat').build(3)


def test_gaussian_validation():
    with pytest.raises(ValueError):
        GaussianEllipsoid(mean=np.zeros(2), stddevs=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        GaussianEllipsoid(mean=np.zeros(2), stddevs=np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        GaussianEllipsoid(mean=np.zeros(3), stddevs=np.ones(2))
    spec = GaussianEllipsoid(mean=np.array([0.0]), stddevs=np.ones(3))
    assert spec.dimension == 3 and spec.is_centered


def test_gaussian_moments_closed_form():
    mean, variance = distributions.gaussian_squared_norm_moments([2.0, 1.0])
    assert mean == 5.0
    assert variance == 2.0 * 17.0


def test_resize():
    assert distributions.resize(UniformCube(dimension=3), 10).dimension == 10
    slab = distributions.resize(SlabMixture(dimension=3, weight=0.2, axis=1), 7)
    assert (slab.dimension, slab.weight, slab.axis) == (7, 0.2, 1)
    gaussian = distributions.resize(distributions.make_gaussian(2, SpectrumRule('power', 1.0), 0.0), 5)
    assert gaussian.dimension == 5
    with pytest.raises(ValueError):
        distributions.resize(distributions.make_gaussian(2, [2.0, 1.0]), 5)


def test_realize_queries():
    cube = UniformCube(dimension=3)
    stream = derive_stream(0, 4)
    np.testing.assert_array_equal(distributions.realize_queries(QuerySpec('center'), cube, stream)[0],
                                  np.full(3, 0.5))
    np.testing.assert_array_equal(distributions.realize_queries(QuerySpec('corner'), cube, stream)[0], np.zeros(3))
    random_queries = distributions.realize_queries(QuerySpec('uniform-random', count=5), cube, stream)
    assert len(random_queries) == 5 and all(distributions.in_support(cube, query) for query in random_queries)
    gaussian = distributions.make_gaussian(2, mean=[1.0, -1.0])
    np.testing.assert_array_equal(distributions.realize_queries(QuerySpec('center'), gaussian, stream)[0],
                                  [1.0, -1.0])
    with pytest.raises(ValueError):
        distributions.realize_queries(QuerySpec('explicit', points=((0.5, 1.5, 0.5),)), cube, stream)
    with pytest.raises(ValueError):
        QuerySpec('nearest')


def test_density_bound_rules():
    assert DensityBoundRule('constant', c=2.0).evaluate(100) == pytest.approx(2.0)
    assert DensityBoundRule('polynomial', c=2.0, k=1.0).evaluate(10) == pytest.approx(20.0)
    exponential = DensityBoundRule('exponential', base=2.0)
    assert not exponential.is_subexponential
    assert exponential.evaluate(10) == pytest.approx(1024.0)
    assert exponential.evaluate(5000) == math.inf
    profile = DensityBoundRule('polynomial', c=3.0, k=2.0).growth_profile([10, 100, 1000, 10000])
    assert all(later < earlier for earlier, later in zip(profile, profile[1:]))
    with pytest.raises(ValueError):
        DensityBoundRule('exponential', base=1.0)


def test_invalid_specs():
    with pytest.raises(ValueError):
        UniformCube(dimension=0)
    with pytest.raises(ValueError):
        SlabMixture(dimension=4, weight=1.0)
    with pytest.raises(ValueError):
        SlabMixture(dimension=4, weight=0.5, axis=4)
