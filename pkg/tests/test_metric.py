import math

import numpy as np
import pytest

from nnstabz.metric import (band_check, delta, instability_event, p_distance, p_power_distance, p_power_distances,
                            validate_p, z_statistic)


def test_p_distance_matches_closed_forms():
    assert p_distance([0, 0], [3, 4], 2) == 5.0
    assert p_distance([0, 0], [1, 1], 1) == 2.0
    # quasi-norm below p = 1
    assert p_distance([0, 0], [1, 1], 0.5) == pytest.approx(4.0)


def test_p_power_distance_rejects_bad_input():
    with pytest.raises(ValueError):
        p_power_distance([0, 0], [1, 1, 1], 2)
    with pytest.raises(ValueError):
        p_power_distance([0, 0], [1, 1], 0)
    with pytest.raises(ValueError):
        p_power_distance([0, np.nan], [1, 1], 2)
    with pytest.raises(ValueError):
        validate_p(2.0, minimum=3.0)


@pytest.mark.parametrize('p', [0.5, 1.0, 2.0, 3.0])
def test_vectorized_distances_agree_with_scalar(p):
    rng = np.random.default_rng(11)
    points = rng.random((20, 6))
    query = rng.random(6)
    expected = [p_power_distance(row, query, p) for row in points]
    np.testing.assert_array_equal(p_power_distances(points, query, p), expected)


def test_delta_values():
    assert delta(1.0, 1.0) == pytest.approx(1.0 / 3.0)
    assert delta(0.1, 2.0) == pytest.approx(0.21 / 2.21)
    # (1 + eps)^p - 1 ~ p * eps for tiny eps, so delta ~ eps
    assert delta(1e-6, 2.0) == pytest.approx(1e-6, rel=1e-5)
    with pytest.raises(ValueError):
        delta(1e300, 2.0)
    with pytest.raises(ValueError):
        delta(1e10, 2.0)


@pytest.mark.parametrize('p', [0.5, 1.0, 2.0, 3.0])
def test_delta_is_increasing_and_inside_unit_interval(p):
    values = [delta(epsilon, p) for epsilon in (1e-6, 1e-3, 0.1, 1.0, 10.0)]
    assert all(0 < value < 1 for value in values)
    assert all(later > earlier for earlier, later in zip(values, values[1:]))


def test_delta_rejects_non_positive_epsilon():
    with pytest.raises(ValueError):
        delta(0.0, 2.0)
    with pytest.raises(ValueError):
        delta(-1.0, 2.0)


def test_instability_event():
    assert instability_event([1.0, 1.05], 0.1)
    assert not instability_event([1.0, 1.2], 0.1)
    assert instability_event([3.0], 0.1)
    assert instability_event([0.0, 0.0], 0.5)


def test_instability_and_z_share_the_boundary():
    dists = [1.0, 1.1]
    assert instability_event(dists, 0.1)
    assert z_statistic(dists, 0.1) == 0.0


def test_instability_event_rejects_invalid_sets():
    with pytest.raises(ValueError):
        instability_event([], 0.1)
    with pytest.raises(ValueError):
        instability_event([1.0, -0.5], 0.1)


def test_z_statistic():
    assert z_statistic([1.0, 2.0], 0.5) == pytest.approx(0.5)
    assert z_statistic([2.0], 0.1) == pytest.approx(-0.2)


def test_band_check():
    assert band_check([0.95, 1.05], 1.0, 0.1)
    assert not band_check([1.2], 1.0, 0.1)
    assert band_check([1.09], 1.0, 0.1)
    with pytest.raises(ValueError):
        band_check([1.0], -1.0, 0.1)
    with pytest.raises(ValueError):
        band_check([1.0], 1.0, 1.0)


def test_band_implies_bounded_ratio():
    rng = np.random.default_rng(5)
    for _ in range(10000):
        p = float(rng.choice([0.5, 1.0, 2.0, 3.0]))
        epsilon = float(10.0 ** rng.uniform(-2.0, 1.0))
        gamma = float(rng.uniform(0.5, 50.0))
        delta_value = delta(epsilon, p)
        powers = gamma * (1.0 + delta_value * rng.uniform(-0.999, 0.999, size=int(rng.integers(1, 21))))
        assert band_check(powers, gamma, delta_value)
        assert instability_event(powers ** (1.0 / p), epsilon), (p, epsilon, gamma)
        outside = np.append(powers, gamma * (1.0 + delta_value * rng.choice([-1.001, 1.001])))
        assert not band_check(outside, gamma, delta_value)


def test_band_edge_is_not_widened_by_rounding():
    delta_value = delta(1.0, 2.0)
    above = (1.0 + delta_value) * (1.0 + 3.0 * np.finfo(float).eps)
    assert not band_check([above, 1.0 - delta_value], 1.0, delta_value)
    assert band_check([1.0 + 0.999 * delta_value, 1.0 - 0.999 * delta_value], 1.0, delta_value)


@pytest.mark.parametrize('p', [0.5, 1.0, 2.0, 3.0])
def test_p_distance_is_symmetric_and_separates_points(p):
    rng = np.random.default_rng(23)
    for _ in range(200):
        x, y = rng.normal(size=(2, 5))
        assert p_distance(x, y, p) == p_distance(y, x, p)
        assert p_distance(x, x, p) == 0.0
        assert p_distance(x, y, p) > 0.0


@pytest.mark.parametrize('p', [0.5, 1.0, 2.0, 3.0])
def test_p_distance_triangle_inequality(p):
    # below p = 1 only the quasi-norm form with constant 2^(1/p - 1) holds
    constant = max(1.0, 2.0 ** (1.0 / p - 1.0))
    rng = np.random.default_rng(29)
    for _ in range(1000):
        x, y, z = rng.normal(size=(3, 6))
        through_y = p_distance(x, y, p) + p_distance(y, z, p)
        assert p_distance(x, z, p) <= constant * through_y * (1.0 + 1e-12)


@pytest.mark.parametrize('p', [1.0, 2.0, 3.0])
def test_million_coordinate_sums_are_order_independent(p):
    rng = np.random.default_rng(31)
    points = rng.random((3, 1000000))
    query = rng.random(1000000)
    batched = p_power_distances(points, query, p)
    np.testing.assert_array_equal(batched, [p_power_distance(row, query, p) for row in points])
    np.testing.assert_array_equal(p_power_distances(points[:, ::-1], query[::-1], p), batched)
    shuffle = rng.permutation(1000000)
    np.testing.assert_array_equal(p_power_distances(points[:, shuffle], query[shuffle], p), batched)


def test_delta_reproduces_ratio_identity():
    for p in (0.5, 1.0, 2.0, 4.0):
        for epsilon in (0.01, 0.5, 3.0):
            value = delta(epsilon, p)
            assert (1 + value) / (1 - value) == pytest.approx(math.pow(1 + epsilon, p), rel=1e-10)
