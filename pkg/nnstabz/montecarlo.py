#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Monte Carlo
-------------------

This module contains the reproducible, parallel estimators of NNSTABZ: the instability probability
over fresh datasets, the band-violation frequency that serves as the oracle for the tail bounds,
E[Z] / d^(1/p), the zeta-stability classification of queries, the stable-region fraction and the
relative-variance / relative-contrast diagnostics.

Every random draw comes from a Philox stream keyed by (seed, lane path), where the lane path only
depends on what is being drawn (purpose, query index, trial index). Work units are mapped with an
order-preserving mpire WorkerPool and aggregated with integer counts and math.fsum, so the worker
count never changes a result.

Usage:
    Estimators take an ExperimentConfig and return an EstimateWithCI::

        from nnstabz import montecarlo
        estimate = montecarlo.estimate_instability_probability(config, query, workers=8)

.. versionadded:: 0.1.0
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpire import WorkerPool
from scipy import stats

from nnstabz import constants
from nnstabz import distributions
from nnstabz.bounds import DatasetSizeRule
from nnstabz.metric import instability_event, p_power_distances, validate_epsilon, validate_p, z_statistic

# Trials handed to one worker call
TRIAL_BLOCK = 64


class MemoryCapExceeded(RuntimeError):
    """Raised when one trial would materialize more than max_values_per_trial values."""


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One fully validated experiment: the law, n(d), the metric, the query policy and the estimator budget.

    Attributes:
    -----------
    spec: DistributionSpec
        The data-generating law; its dimension is d.
    size_rule: DatasetSizeRule
        The dataset size n(d).
    p, epsilon: float
        The metric exponent and the relative-contrast slack.
    query: QuerySpec
        How the query points are realized.
    trials: int
        Fresh datasets per query.
    seed: int
        The 64-bit master seed.
    lane: int
        The base lane; sweep points get distinct lanes.
    """
    spec: distributions.DistributionSpec
    size_rule: DatasetSizeRule
    p: float
    epsilon: float
    query: distributions.QuerySpec = field(default_factory=distributions.QuerySpec)
    trials: int = constants.DEFAULT_TRIALS
    seed: int = constants.DEFAULT_SEED
    zeta: float = constants.DEFAULT_ZETA
    level: float = constants.DEFAULT_LEVEL
    lane: int = 0
    density_bound: Optional[distributions.DensityBoundRule] = None
    omega: Optional[float] = None
    n_queries: int = constants.DEFAULT_N_QUERIES
    estimators: Tuple[str, ...] = ('instability',)
    max_values_per_trial: int = constants.MAX_VALUES_PER_TRIAL

    def __post_init__(self):
        object.__setattr__(self, 'p', validate_p(self.p))
        object.__setattr__(self, 'epsilon', validate_epsilon(self.epsilon))
        object.__setattr__(self, 'estimators', tuple(self.estimators))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f'trials must be a positive integer, got {self.trials}')
        if not constants.ZETA_LOWER < self.zeta < 1:
            raise ValueError(f'zeta must lie in ({constants.ZETA_LOWER}, 1), got {self.zeta}')
        if not 0 < self.level < 1:
            raise ValueError(f'confidence level must lie in (0, 1), got {self.level}')
        if not 0 <= self.seed < constants.SEED_UPPER:
            raise ValueError(f'seed must be an unsigned 64-bit integer, got {self.seed}')
        if self.lane < 0:
            raise ValueError(f'lane must be non-negative, got {self.lane}')
        if self.n_queries < 1:
            raise ValueError(f'n_queries must be at least 1, got {self.n_queries}')
        if self.omega is not None and not 0 <= self.omega < 1:
            raise ValueError(f'omega must lie in [0, 1), got {self.omega}')
        if self.max_values_per_trial < 1:
            raise ValueError(f'max_values_per_trial must be positive, got {self.max_values_per_trial}')

    @property
    def d(self) -> int:
        return self.spec.dimension

    def beta_value(self) -> float:
        """Returns beta(d): the configured density bound rule, else the exact density supremum."""
        if self.density_bound is not None:
            return self.density_bound.evaluate(self.d)
        return distributions.density_sup(self.spec)

    def check_memory(self) -> int:
        """
        Returns the realized n(d), or raises MemoryCapExceeded if n(d) * d exceeds the cap.
        """
        log_values = self.size_rule.log_n(self.d) + math.log(self.d)
        if log_values > math.log(self.max_values_per_trial):
            logging.error(f' n(d) * d = exp({log_values:.4g}) exceeds the cap of {self.max_values_per_trial} '
                          f'values per trial.')
            raise MemoryCapExceeded(f'n(d) * d exceeds {self.max_values_per_trial} values per trial at d={self.d}')
        return self.size_rule.realize(self.d)


@dataclass(frozen=True)
class TrialOutcome:
    """Nearest and farthest distance of one fresh dataset to the query."""
    d_min: float
    d_max: float
    z: float
    unstable: bool


@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    method: str
    excluded: int = 0
    standard_error: Optional[float] = None

    def __post_init__(self):
        if not math.isnan(self.estimate) and not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError(f'interval ({self.ci_low}, {self.ci_high}) does not contain {self.estimate}')


@dataclass(frozen=True)
class QueryClassification:
    """The zeta-stability verdict for one query, with the frequency of z >= 0 it rests on."""
    query_index: int
    stable: bool
    indeterminate: bool
    frequency: float
    ci_low: float
    ci_high: float
    trials: int
    zeta: float


@dataclass(frozen=True)
class StableRegionEstimate:
    """
    Attributes:
    -----------
    stable_fraction: EstimateWithCI
        (# stable queries) / (# queries) with a Wilson interval.
    classifications: List[QueryClassification]
        Per-query records, in query order.
    decisive_fraction: float
        Stable share among queries whose interval did not straddle 1 - zeta (NaN if none).
    """
    stable_fraction: EstimateWithCI
    classifications: List[QueryClassification]
    zeta: float
    indeterminate: int
    decisive_fraction: float


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean and variance of the p-power distance with normal intervals."""
    mean: EstimateWithCI
    variance: EstimateWithCI


def derive_stream(seed: int, lane: Union[int, Sequence[int]]) -> np.random.Generator:
    """
    Returns the random stream of one lane.

    The stream is Philox keyed by SeedSequence(seed, spawn_key=lane), so two lanes are
    independent and the same (seed, lane) always replays the same draws.

    :param seed: The 64-bit master seed.
    :type seed: int
    :param lane: A lane index or a lane path of non-negative integers.
    :type lane: Union[int, Sequence[int]]
    :return: The generator.
    :rtype: np.random.Generator
    """
    path = (int(lane),) if np.ndim(lane) == 0 else tuple(int(entry) for entry in lane)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=path)))


def wilson_interval(successes: int, trials: int, level: float = constants.DEFAULT_LEVEL) -> Tuple[float, float]:
    """
    Returns the Wilson score interval for a binomial proportion.

    :param successes: Number of successes, 0 <= successes <= trials.
    :type successes: int
    :param trials: Number of trials (>= 1).
    :type trials: int
    :param level: The confidence level in (0, 1).
    :type level: float
    :return: The (low, high) bounds, clamped to [0, 1].
    :rtype: Tuple[float, float]

    :Example:

    >>> low, high = wilson_interval(50, 100)
    >>> round(low, 3), round(high, 3)
    (0.404, 0.596)
    """
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f'need 0 <= successes <= trials and trials >= 1, got {successes} of {trials}')
    if not 0 < level < 1:
        raise ValueError(f'confidence level must lie in (0, 1), got {level}')
    interval = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method='wilson')
    low = 0.0 if successes == 0 else max(0.0, float(interval.low))
    high = 1.0 if successes == trials else min(1.0, float(interval.high))
    return low, high


def _proportion(successes: int, trials: int, level: float, seed: int, method: str = 'wilson') -> EstimateWithCI:
    frequency = successes / trials
    low, high = wilson_interval(successes, trials, level)
    return EstimateWithCI(estimate=frequency, ci_low=min(low, frequency), ci_high=max(high, frequency),
                          trials=trials, seed=seed, method=method,
                          standard_error=math.sqrt(frequency * (1.0 - frequency) / trials))


def _normal_mean(values: np.ndarray, level: float, seed: int, method: str = 'normal') -> EstimateWithCI:
    count = values.size
    mean = math.fsum(values) / count
    spread = math.sqrt(math.fsum((values - mean) ** 2) / (count - 1)) if count > 1 else 0.0
    standard_error = spread / math.sqrt(count)
    half_width = float(stats.norm.ppf(0.5 + level / 2.0)) * standard_error
    return EstimateWithCI(estimate=mean, ci_low=mean - half_width, ci_high=mean + half_width, trials=count,
                          seed=seed, method=method, standard_error=standard_error)


def _map_ordered(function: Callable, items: Sequence, workers: int) -> list:
    """Maps function over items; results come back in item order for any worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with WorkerPool(n_jobs=min(workers, len(items))) as pool:
        return pool.map(function, items, progress_bar=False)


def _dataset_extremes(spec: distributions.DistributionSpec, stream: np.random.Generator, n: int,
                      query: np.ndarray, p: float) -> Tuple[float, float]:
    """Smallest and largest p-power distance of n sequential draws, drawn in row chunks."""
    chunk_rows = max(1, constants.CHUNK_VALUES // spec.dimension)
    smallest = math.inf
    largest = -math.inf
    remaining = n
    while remaining > 0:
        rows = min(chunk_rows, remaining)
        powers = p_power_distances(distributions.sample_many(spec, stream, rows), query, p)
        smallest = min(smallest, float(powers.min()))
        largest = max(largest, float(powers.max()))
        remaining -= rows
    return smallest, largest


def run_trial(config: ExperimentConfig, query: np.ndarray, trial_index: int, query_index: int = 0) -> TrialOutcome:
    """
    Samples one fresh dataset of size n(d) and returns its nearest and farthest distance to the query.

    The dataset stream is keyed by (lane, dataset, query index, trial index), and each point consumes a
    fixed block of it, so the size-n dataset of a trial is a prefix of its size-(n + 1) dataset.

    :param config: The experiment configuration.
    :type config: ExperimentConfig
    :param query: The query point.
    :type query: np.ndarray
    :param trial_index: The trial index.
    :type trial_index: int
    :param query_index: Index of the query within the run.
    :type query_index: int
    :return: The trial outcome.
    :rtype: TrialOutcome
    :raises MemoryCapExceeded: If n(d) * d exceeds the configured cap.
    """
    n = config.check_memory()
    stream = derive_stream(config.seed, (config.lane, constants.STREAM_DATASET, query_index, trial_index))
    smallest, largest = _dataset_extremes(config.spec, stream, n, np.asarray(query, dtype=float), config.p)
    extremes = [smallest ** (1.0 / config.p), largest ** (1.0 / config.p)]
    return TrialOutcome(d_min=extremes[0], d_max=extremes[1], z=z_statistic(extremes, config.epsilon),
                        unstable=instability_event(extremes, config.epsilon))


def _run_trial_block(config: ExperimentConfig, query: np.ndarray, query_index: int, block: int) -> List[TrialOutcome]:
    start = block * TRIAL_BLOCK
    stop = min(config.trials, start + TRIAL_BLOCK)
    return [run_trial(config, query, trial, query_index) for trial in range(start, stop)]


def run_trials(config: ExperimentConfig, query: np.ndarray, query_index: int = 0,
               workers: int = 1) -> List[TrialOutcome]:
    """Runs every trial of the configuration for one query and returns the outcomes in trial order."""
    config.check_memory()
    blocks = range(math.ceil(config.trials / TRIAL_BLOCK))
    results = _map_ordered(partial(_run_trial_block, config, np.asarray(query, dtype=float), query_index), blocks,
                           workers)
    return [outcome for block in results for outcome in block]


def summarize_instability(outcomes: Sequence[TrialOutcome], config: ExperimentConfig) -> EstimateWithCI:
    """Returns the unstable fraction of the outcomes with a Wilson interval."""
    unstable = sum(1 for outcome in outcomes if outcome.unstable)
    return _proportion(unstable, len(outcomes), config.level, config.seed)


def estimate_instability_probability(config: ExperimentConfig, query: np.ndarray, query_index: int = 0,
                                     workers: int = 1) -> EstimateWithCI:
    """
    Estimates the probability that the query is unstable, over fresh datasets.

    :param config: The experiment configuration.
    :type config: ExperimentConfig
    :param query: The fixed query point.
    :type query: np.ndarray
    :param query_index: Index of the query within the run; part of every dataset lane.
    :type query_index: int
    :param workers: Number of worker processes.
    :type workers: int
    :return: The unstable fraction with a Wilson interval at the configured level.
    :rtype: EstimateWithCI
    """
    estimate = summarize_instability(run_trials(config, query, query_index, workers), config)
    logging.info(f' Instability estimate: {estimate.estimate:.6g} [{estimate.ci_low:.6g}, {estimate.ci_high:.6g}] '
                 f'over {estimate.trials} trials (d={config.d}, epsilon={config.epsilon}, p={config.p})')
    return estimate


def _single_point_batch(spec: distributions.DistributionSpec, seed: int, lane: int, trials: int,
                        batch: int) -> np.ndarray:
    start = batch * constants.DEVIATION_BATCH
    rows = min(constants.DEVIATION_BATCH, trials - start)
    stream = derive_stream(seed, (lane, constants.STREAM_SINGLE_POINT, batch))
    return distributions.sample_many(spec, stream, rows)


def _violations_in_batch(spec, query, p, gamma, delta_value, seed, lane, trials, batch) -> int:
    powers = p_power_distances(_single_point_batch(spec, seed, lane, trials, batch), query, p)
    return int(np.count_nonzero(np.abs(powers - gamma) > gamma * delta_value))


def _single_point_powers(spec: distributions.DistributionSpec, query: np.ndarray, p: float, trials: int, seed: int,
                         lane: int) -> np.ndarray:
    batches = range(math.ceil(trials / constants.DEVIATION_BATCH))
    return np.concatenate([p_power_distances(_single_point_batch(spec, seed, lane, trials, batch), query, p)
                           for batch in batches])


def estimate_deviation_probability(spec: distributions.DistributionSpec, query: np.ndarray, p: float, gamma: float,
                                   delta_value: float, trials: int, seed: int,
                                   level: float = constants.DEFAULT_LEVEL, workers: int = 1,
                                   lane: int = 0) -> EstimateWithCI:
    """
    Estimates Pr[| ||Y - q||_p^p - gamma | > gamma * delta] from independent single-point draws.

    This is the Monte Carlo oracle for the Hoeffding and Chebyshev tail bounds. Draws come in fixed
    batches, batch b always from lane path (lane, single-point, b).

    :param spec: The data-generating law.
    :param query: The query point.
    :type query: np.ndarray
    :param p: The exponent of the p-norm.
    :type p: float
    :param gamma: The band centre (>= 0).
    :type gamma: float
    :param delta_value: The relative band half-width (>= 0).
    :type delta_value: float
    :param trials: Number of single-point draws.
    :type trials: int
    :param seed: The master seed.
    :type seed: int
    :return: The violation frequency with a Wilson interval.
    :rtype: EstimateWithCI
    """
    p = validate_p(p)
    if gamma < 0:
        raise ValueError(f'gamma must be non-negative, got {gamma}')
    if delta_value < 0:
        raise ValueError(f'delta must be non-negative, got {delta_value}')
    if trials < 1:
        raise ValueError(f'trials must be at least 1, got {trials}')
    query = np.asarray(query, dtype=float)
    batches = range(math.ceil(trials / constants.DEVIATION_BATCH))
    counts = _map_ordered(partial(_violations_in_batch, spec, query, p, gamma, delta_value, seed, lane, trials),
                          batches, workers)
    estimate = _proportion(sum(counts), trials, level, seed)
    logging.info(f' Deviation frequency: {estimate.estimate:.6g} over {trials} draws '
                 f'(gamma={gamma:.6g}, delta={delta_value:.6g})')
    return estimate


def _z_ratio_trial(config: ExperimentConfig, n: int, trial_index: int) -> float:
    query = distributions.sample(config.spec, derive_stream(config.seed, (config.lane, constants.STREAM_QUERY_DRAW,
                                                                          0, trial_index)))
    stream = derive_stream(config.seed, (config.lane, constants.STREAM_DATASET, 0, trial_index))
    smallest, largest = _dataset_extremes(config.spec, stream, n, query, config.p)
    z = z_statistic([smallest ** (1.0 / config.p), largest ** (1.0 / config.p)], config.epsilon)
    return z / config.d ** (1.0 / config.p)


def estimate_expected_z_ratio(config: ExperimentConfig, workers: int = 1) -> EstimateWithCI:
    """
    Estimates E[Z] / d^(1/p) with the query drawn per trial as an independent point of the law.

    :param config: The experiment configuration; its query spec is not used.
    :type config: ExperimentConfig
    :param workers: Number of worker processes.
    :type workers: int
    :return: The sample mean with a normal-approximation interval.
    :rtype: EstimateWithCI
    """
    n = config.check_memory()
    ratios = _map_ordered(partial(_z_ratio_trial, config, n), range(config.trials), workers)
    estimate = _normal_mean(np.asarray(ratios), config.level, config.seed)
    logging.info(f' E[Z] / d^(1/p) estimate: {estimate.estimate:.6g} +/- {estimate.standard_error:.3g}')
    return estimate


def classify_outcomes(outcomes: Sequence[TrialOutcome], config: ExperimentConfig,
                      query_index: int = 0) -> QueryClassification:
    """Classifies a query from its trial outcomes; z = 0 counts as stable."""
    stable_trials = sum(1 for outcome in outcomes if outcome.z >= 0)
    frequency = stable_trials / len(outcomes)
    low, high = wilson_interval(stable_trials, len(outcomes), config.level)
    threshold = 1.0 - config.zeta
    indeterminate = low < threshold < high
    if indeterminate:
        logging.warning(f' Query {query_index}: interval [{low:.4g}, {high:.4g}] straddles 1 - zeta = {threshold:.4g}; '
                        f'classification is indeterminate.')
    return QueryClassification(query_index=query_index, stable=frequency >= threshold, indeterminate=indeterminate,
                               frequency=frequency, ci_low=low, ci_high=high, trials=len(outcomes),
                               zeta=config.zeta)


def classify_query_stability(config: ExperimentConfig, query: np.ndarray, query_index: int = 0,
                             workers: int = 1) -> QueryClassification:
    """
    Decides whether Pr[Z >= 0] >= 1 - zeta for the query.

    The verdict is ``stable``; ``indeterminate`` is set when the Wilson interval of the frequency
    straddles 1 - zeta.
    """
    return classify_outcomes(run_trials(config, query, query_index, workers), config, query_index)


def _classify_indexed(config: ExperimentConfig, queries: np.ndarray, query_index: int) -> QueryClassification:
    return classify_query_stability(config, queries[query_index], query_index)


def estimate_stable_fraction(config: ExperimentConfig, workers: int = 1) -> StableRegionEstimate:
    """
    Estimates the volume share of zeta-stable queries with n_queries uniform queries on [0, 1]^d.

    :param config: The experiment configuration (cube-supported law).
    :type config: ExperimentConfig
    :param workers: Number of worker processes; queries are the work units.
    :type workers: int
    :return: The stable fraction and the per-query classifications.
    :rtype: StableRegionEstimate
    """
    if not distributions.is_cube_supported(config.spec):
        raise ValueError(f'the stable region is measured on [0, 1]^d; {config.spec.family} is not cube-supported')
    config.check_memory()
    stream = derive_stream(config.seed, (config.lane, constants.STREAM_QUERY_REALIZATION))
    queries = stream.random((config.n_queries, config.d))
    classifications = _map_ordered(partial(_classify_indexed, config, queries), range(config.n_queries), workers)

    stable = sum(1 for record in classifications if record.stable)
    indeterminate = sum(1 for record in classifications if record.indeterminate)
    decisive = [record for record in classifications if not record.indeterminate]
    decisive_fraction = (sum(1 for record in decisive if record.stable) / len(decisive)) if decisive else math.nan
    fraction = _proportion(stable, config.n_queries, config.level, config.seed)
    fraction = replace(fraction, excluded=indeterminate)
    logging.info(f' Stable fraction: {fraction.estimate:.4g} ({stable}/{config.n_queries}), '
                 f'{indeterminate} indeterminate, decisive fraction {decisive_fraction:.4g}')
    return StableRegionEstimate(stable_fraction=fraction, classifications=classifications, zeta=config.zeta,
                                indeterminate=indeterminate, decisive_fraction=decisive_fraction)


def _relative_variance(distances: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.var(distances, axis=axis, ddof=1) / np.mean(distances, axis=axis) ** 2


def estimate_relative_variance(spec: distributions.DistributionSpec, query: np.ndarray, p: float, trials: int,
                               seed: int, level: float = constants.DEFAULT_LEVEL, lane: int = 0) -> EstimateWithCI:
    """
    Estimates Var[||Y - q||_p] / E[||Y - q||_p]^2 by the plug-in estimator.

    The interval is a percentile bootstrap with a fixed resample count, drawn from its own lane.

    :raises ValueError: If trials < 2 or the mean distance is zero.
    """
    p = validate_p(p)
    if trials < 2:
        raise ValueError(f'relative variance needs at least 2 trials, got {trials}')
    distances = _single_point_powers(spec, np.asarray(query, dtype=float), p, trials, seed, lane) ** (1.0 / p)
    if math.fsum(distances) == 0:
        logging.error(' Relative variance requested for a zero mean distance.')
        raise ValueError('relative variance is undefined for a zero mean distance')
    if np.all(distances == distances[0]):
        return EstimateWithCI(estimate=0.0, ci_low=0.0, ci_high=0.0, trials=trials, seed=seed,
                              method='bootstrap-percentile', standard_error=0.0)
    value = float(_relative_variance(distances))
    result = stats.bootstrap((distances,), _relative_variance, vectorized=True, batch=100,
                             n_resamples=constants.DEFAULT_BOOTSTRAP_RESAMPLES, confidence_level=level,
                             method='percentile',
                             random_state=derive_stream(seed, (lane, constants.STREAM_BOOTSTRAP)))
    low = min(float(result.confidence_interval.low), value)
    high = max(float(result.confidence_interval.high), value)
    logging.info(f' Relative variance: {value:.6g} [{low:.6g}, {high:.6g}] over {trials} draws')
    return EstimateWithCI(estimate=value, ci_low=low, ci_high=high, trials=trials, seed=seed,
                          method='bootstrap-percentile', standard_error=float(result.standard_error))


def median_interval(values: np.ndarray, level: float) -> Tuple[float, float, float]:
    """Returns the median and its distribution-free order-statistics interval."""
    ordered = np.sort(np.asarray(values, dtype=float))
    count = ordered.size
    median = float(np.median(ordered))
    rank = int(stats.binom.ppf((1.0 - level) / 2.0, count, 0.5))
    low = float(ordered[max(rank - 1, 0)])
    high = float(ordered[min(count - rank, count - 1)])
    return median, min(low, median), max(high, median)


def estimate_relative_contrast(config: ExperimentConfig, query: np.ndarray, query_index: int = 0,
                               workers: int = 1) -> EstimateWithCI:
    """
    Estimates the median of (D_max - D_min) / D_min over fresh datasets.

    Trials with D_min = 0 are excluded and counted in ``excluded``.

    :raises ValueError: If n(d) < 2 or every trial had D_min = 0.
    """
    if config.check_memory() < 2:
        raise ValueError('relative contrast needs datasets of at least 2 points')
    outcomes = run_trials(config, query, query_index, workers)
    contrasts = np.array([(outcome.d_max - outcome.d_min) / outcome.d_min for outcome in outcomes
                          if outcome.d_min > 0])
    excluded = len(outcomes) - contrasts.size
    if contrasts.size == 0:
        raise ValueError('every trial had a zero nearest-neighbor distance')
    if excluded:
        logging.warning(f' Relative contrast: {excluded} trials with D_min = 0 excluded.')
    median, low, high = median_interval(contrasts, config.level)
    return EstimateWithCI(estimate=median, ci_low=low, ci_high=high, trials=int(contrasts.size), seed=config.seed,
                          method='order-statistics', excluded=excluded)


def estimate_squared_distance_moments(spec: distributions.DistributionSpec, query: np.ndarray, p: float,
                                      trials: int, seed: int, level: float = constants.DEFAULT_LEVEL,
                                      lane: int = 0) -> MomentEstimate:
    """
    Estimates the mean and variance of ||Y - q||_p^p.

    For a centered Gaussian, p = 2 and q = 0 they should match (sum lambda^2, 2 sum lambda^4).
    """
    p = validate_p(p)
    if trials < 2:
        raise ValueError(f'moments need at least 2 trials, got {trials}')
    powers = _single_point_powers(spec, np.asarray(query, dtype=float), p, trials, seed, lane)
    mean = _normal_mean(powers, level, seed)
    centered = powers - mean.estimate
    variance = math.fsum(centered ** 2) / (trials - 1)
    fourth = math.fsum(centered ** 4) / trials
    variance_se = math.sqrt(max(fourth - variance ** 2, 0.0) / trials)
    half_width = float(stats.norm.ppf(0.5 + level / 2.0)) * variance_se
    return MomentEstimate(mean=mean,
                          variance=EstimateWithCI(estimate=variance, ci_low=variance - half_width,
                                                  ci_high=variance + half_width, trials=trials, seed=seed,
                                                  method='normal', standard_error=variance_se))


def estimate_instability_fixed_dataset(config: ExperimentConfig) -> EstimateWithCI:
    """
    Dataset-reuse diagnostic: one dataset of size n(d), n_queries queries, unstable fraction over queries.

    This is not an estimate of the instability probability, which is taken over fresh datasets.
    """
    n = config.check_memory()
    dataset = distributions.sample_many(config.spec,
                                        derive_stream(config.seed, (config.lane, constants.STREAM_FIXED_DATASET, 0)),
                                        n)
    query_stream = derive_stream(config.seed, (config.lane, constants.STREAM_FIXED_DATASET, 1))
    if distributions.is_cube_supported(config.spec):
        queries = query_stream.random((config.n_queries, config.d))
    else:
        queries = distributions.sample_many(config.spec, query_stream, config.n_queries)
    unstable = 0
    for query in queries:
        powers = p_power_distances(dataset, query, config.p)
        unstable += instability_event([powers.min() ** (1.0 / config.p), powers.max() ** (1.0 / config.p)],
                                      config.epsilon)
    logging.warning(' Fixed-dataset estimate reuses one dataset for every query; it is a diagnostic only.')
    return _proportion(unstable, config.n_queries, config.level, config.seed, method='wilson-fixed-dataset')
