"""
Acceptance-scale Monte Carlo runs. Deselect with ``pytest -m "not slow"``.
"""
import math

import numpy as np
import pytest

from nnstabz import bounds
from nnstabz import distributions
from nnstabz import montecarlo
from nnstabz.bounds import DatasetSizeRule
from nnstabz.distributions import QuerySpec, UniformCube
from nnstabz.metric import delta
from nnstabz.montecarlo import ExperimentConfig

from conftest import uniform_config

pytestmark = pytest.mark.slow


@pytest.mark.parametrize('epsilon', [0.1, 1.0])
def test_two_points_on_a_line(epsilon):
    config = uniform_config(d=1, n=2, p=1.0, epsilon=epsilon, trials=100000, seed=7)
    estimate = montecarlo.estimate_instability_probability(config, np.zeros(1), workers=4)
    assert estimate.estimate == pytest.approx(epsilon / (1.0 + epsilon), abs=0.01)


@pytest.mark.parametrize('d', [100, 200, 400])
def test_hoeffding_chain_holds(d):
    query = np.full(d, 0.5)
    tail = bounds.hoeffding_deviation_bound(d, 1.0, 1.0, 1.0)
    deviation = montecarlo.estimate_deviation_probability(UniformCube(dimension=d), query, 1.0,
                                                          bounds.gamma_uniform(query, 1.0), delta(1.0, 1.0), 100000,
                                                          11, workers=4)
    assert deviation.estimate <= tail

    config = uniform_config(d=d, n=10, p=1.0, epsilon=1.0, query='center', trials=20000, seed=11)
    lower = bounds.instability_probability_lower_bound(d, config.size_rule, 1.0, 1.0, 1.0)
    assert lower > 0
    estimate = montecarlo.estimate_instability_probability(config, query, workers=4)
    assert estimate.estimate >= lower - 4 * math.sqrt(lower * (1 - lower) / config.trials)


def test_instability_grows_with_d_when_n_grows_polynomially():
    estimates = []
    for d in (16, 128, 1024):
        config = ExperimentConfig(spec=UniformCube(dimension=d), size_rule=DatasetSizeRule('polynomial', c=1.0, k=1.0),
                                  p=2.0, epsilon=0.2, query=QuerySpec('center'), trials=2000, seed=13)
        estimates.append(montecarlo.estimate_instability_probability(config, np.full(d, 0.5), workers=4))
    for earlier, later in zip(estimates, estimates[1:]):
        slack = 2 * math.hypot(earlier.standard_error, later.standard_error)
        assert later.estimate >= earlier.estimate - slack
    assert estimates[-1].estimate >= 0.9


def test_exponential_datasets_leave_most_queries_stable():
    config = uniform_config(d=6, n=7256, p=2.0, epsilon=0.1, trials=2000, seed=17, n_queries=50)
    region = montecarlo.estimate_stable_fraction(config, workers=4)
    assert region.indeterminate <= 5
    assert region.decisive_fraction >= 0.98


def test_chebyshev_chain_holds_for_the_identity_spectrum():
    spec = distributions.make_gaussian(1000)
    tail = bounds.chebyshev_gaussian_deviation_bound(spec.stddevs, 0.5)
    assert tail == pytest.approx(0.01352, rel=1e-9)
    estimate = montecarlo.estimate_deviation_probability(spec, np.zeros(1000), 2.0, 1000.0, delta(0.5, 2.0), 100000,
                                                         19, workers=4)
    assert estimate.estimate <= tail + 4 * math.sqrt(tail * (1 - tail) / 100000)


def test_results_are_identical_for_1_and_8_workers():
    config = uniform_config(d=1, n=2, p=1.0, epsilon=1.0, trials=100000, seed=7)
    serial = montecarlo.estimate_instability_probability(config, np.zeros(1), workers=1)
    parallel = montecarlo.estimate_instability_probability(config, np.zeros(1), workers=8)
    assert serial == parallel
