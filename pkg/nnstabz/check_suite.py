#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Check Suite
-------------------

This module contains the bound-validity battery run by ``nnstabz check``. Monte Carlo checks pit the
estimators against the closed-form bounds of the given configuration; arithmetic checks compare the
special-function machinery with independent closed forms and reference values.

CHECKS maps each check name to a (function, kwargs) pair. A check function takes the configuration and
the worker count, and returns CheckResult records with status ``passed``, ``failed`` or ``skipped``.

.. versionadded:: 0.1.0
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.special import gammaln

from nnstabz import bounds
from nnstabz import constants
from nnstabz import distributions
from nnstabz import montecarlo
from nnstabz.metric import delta
from nnstabz.montecarlo import ExperimentConfig, MemoryCapExceeded


@dataclass(frozen=True)
class CheckResult:
    check: str
    status: str
    observed: float
    threshold: float
    detail: str

    @property
    def passed(self) -> bool:
        return self.status != 'failed'


def _queries(config: ExperimentConfig) -> List[np.ndarray]:
    stream = montecarlo.derive_stream(config.seed, (config.lane, constants.STREAM_QUERY_REALIZATION))
    return distributions.realize_queries(config.query, config.spec, stream)


def _compare(check: str, observed: float, threshold: float, holds: bool, detail: str) -> CheckResult:
    return CheckResult(check=check, status='passed' if holds else 'failed', observed=observed, threshold=threshold,
                       detail=detail)


def _skip(check: str, detail: str) -> CheckResult:
    return CheckResult(check=check, status='skipped', observed=math.nan, threshold=math.nan, detail=detail)


def _relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


def _tail_setting(config: ExperimentConfig, query: np.ndarray):
    """Returns (tail bound, gamma) for the configuration, or None outside both bound chains."""
    spec = config.spec
    if distributions.is_cube_supported(spec):
        return (bounds.hoeffding_deviation_bound(config.d, config.p, config.epsilon, config.beta_value()),
                bounds.gamma_uniform(query, config.p))
    if config.p == 2 and spec.is_centered and not np.any(query != 0):
        return (bounds.chebyshev_gaussian_deviation_bound(spec.stddevs, config.epsilon),
                distributions.gaussian_squared_norm_moments(spec.stddevs)[0])
    return None


def deviation_validity(config: ExperimentConfig, workers: int, sigmas: float) -> List[CheckResult]:
    """The band-violation frequency must not exceed the tail bound by more than `sigmas` standard errors."""
    results = []
    for index, query in enumerate(_queries(config)):
        name = f'deviation-validity[q{index}]'
        setting = _tail_setting(config, query)
        if setting is None:
            results.append(_skip(name, 'no closed-form tail bound for this law, metric and query'))
            continue
        tail, gamma = setting
        if tail >= 1:
            results.append(_skip(name, 'tail bound is vacuous (>= 1)'))
            continue
        estimate = montecarlo.estimate_deviation_probability(config.spec, query, config.p, gamma,
                                                             delta(config.epsilon, config.p), config.trials,
                                                             config.seed, config.level, workers, config.lane)
        threshold = tail + sigmas * math.sqrt(tail * (1.0 - tail) / config.trials)
        results.append(_compare(name, estimate.estimate, threshold, estimate.estimate <= threshold,
                                f'frequency {estimate.estimate:.6g} vs bound {tail:.6g}'))
    return results


def instability_validity(config: ExperimentConfig, workers: int, sigmas: float) -> List[CheckResult]:
    """The instability estimate must not fall below the lower bound by more than `sigmas` standard errors."""
    results = []
    for index, query in enumerate(_queries(config)):
        name = f'instability-validity[q{index}]'
        setting = _tail_setting(config, query)
        if setting is None:
            results.append(_skip(name, 'no closed-form tail bound for this law, metric and query'))
            continue
        if distributions.is_cube_supported(config.spec):
            lower = bounds.instability_probability_lower_bound(config.d, config.size_rule, config.p, config.epsilon,
                                                               config.beta_value())
        else:
            lower = bounds.gaussian_instability_lower_bound(config.spec.stddevs, config.size_rule, config.epsilon,
                                                            config.d)
        if lower <= 0:
            results.append(_skip(name, 'lower bound is vacuous (0)'))
            continue
        try:
            estimate = montecarlo.estimate_instability_probability(config, query, index, workers)
        except MemoryCapExceeded as error:
            results.append(_skip(name, str(error)))
            continue
        threshold = lower - sigmas * math.sqrt(lower * (1.0 - lower) / config.trials)
        results.append(_compare(name, estimate.estimate, threshold, estimate.estimate >= threshold,
                                f'estimate {estimate.estimate:.6g} vs lower bound {lower:.6g}'))
    return results


def unit_ball_cross_check(config: ExperimentConfig, workers: int, max_euclidean: int, max_taxicab: int,
                          tolerance: float) -> List[CheckResult]:
    """log V_{d,2} against pi^(d/2) / Gamma(1 + d/2) and log V_{d,1} against 2^d / d!."""
    worst = 0.0
    for d in range(1, max_euclidean + 1):
        reference = math.exp(0.5 * d * math.log(math.pi) - float(gammaln(1 + d / 2)))
        worst = max(worst, _relative_error(math.exp(bounds.log_unit_ball_volume(d, 2)), reference))
    for d in range(1, max_taxicab + 1):
        reference = 2.0 ** d / math.factorial(d)
        worst = max(worst, _relative_error(math.exp(bounds.log_unit_ball_volume(d, 1)), reference))
    return [_compare('unit-ball-volume', worst, tolerance, worst <= tolerance,
                     f'worst relative error over p=2 (d<={max_euclidean}) and p=1 (d<={max_taxicab})')]


def ball_volume_limit(config: ExperimentConfig, workers: int, dimension: int, exponents: tuple) -> List[CheckResult]:
    results = []
    for p in sorted(set(exponents) | ({config.p} if config.p >= 1 else set())):
        value, limit = bounds.ball_volume_limit_check(dimension, p)
        results.append(_compare(f'ball-volume-limit[p={p}]', value, limit, value <= limit,
                                f'd^(1/p) V^(1/d) at d={dimension}'))
    return results


def ez_floor(config: ExperimentConfig, workers: int, dimensions: tuple, exponents: tuple, epsilon: float,
             floor: float) -> List[CheckResult]:
    """The E[Z] / d^(1/p) lower bound with n(d) = (4 (1 + epsilon))^d and the uniform density stays above the floor."""
    results = []
    for p in exponents:
        for d in dimensions:
            value = bounds.ez_ratio_lower_bound(d, p, epsilon, d * math.log(4.0 * (1.0 + epsilon)), 1.0)
            results.append(_compare(f'ez-floor[d={d},p={p}]', value, floor, value >= floor,
                                    f'epsilon={epsilon}, log n = d log(4(1+epsilon))'))
    return results


def gamma_ratio_sanity(config: ExperimentConfig, workers: int, tolerance: float) -> List[CheckResult]:
    """
    At d = 1 the ratio is n / (n + 1) exactly, on both sides of the switch-over; for d = 2 both
    evaluations must agree at the switch-over.
    """
    results = []
    for n in (10.0, 1.0e8):
        value = bounds.gamma_function_ratio(math.log(n), 1)
        error = _relative_error(value, n / (n + 1.0))
        results.append(_compare(f'gamma-ratio[d=1,n={n:g}]', error, tolerance, error <= tolerance, 'vs n/(n+1)'))
    switch = math.log(constants.GAMMA_RATIO_EXACT_LIMIT)
    exact = bounds.gamma_function_ratio(switch, 2)
    asymptotic = bounds.gamma_function_ratio(switch + 1e-12, 2)
    error = _relative_error(asymptotic, exact)
    results.append(_compare('gamma-ratio[continuity]', error, 1e-7, error <= 1e-7,
                            'log-gamma differences vs expansion at the switch-over'))
    return results


def spot_values(config: ExperimentConfig, workers: int, tolerance: float) -> List[CheckResult]:
    """Reference values of the volume, largeness, Chebyshev and instability arithmetic."""
    cases = [
        ('stable-volume', bounds.stable_volume_lower_bound(0.01, 0.995, 1.0), 0.005025125628140704, tolerance),
        ('largeness-ratio', bounds.largeness_ratio(0.9, 500, 0.005), -47.38194046236511, tolerance),
        ('chebyshev-identity', bounds.chebyshev_gaussian_deviation_bound(np.ones(1000), 0.5), 0.01352, tolerance),
        ('hoeffding-d200', bounds.hoeffding_deviation_bound(200, 1, 1, 1), 2.0 * math.exp(-200.0 / 72.0), tolerance),
        ('instability-d100000', bounds.instability_probability_lower_bound(
            100000, bounds.DatasetSizeRule('constant', n=1000), 2, 0.1, 1), 0.99285, 1e-4),
    ]
    return [_compare(f'spot[{name}]', value, reference, _relative_error(value, reference) <= allowed,
                     f'reference {reference!r}, relative tolerance {allowed:g}')
            for name, value, reference, allowed in cases]


CHECKS = {
    'deviation-validity': (deviation_validity, {'sigmas': constants.CHECK_SIGMAS}),
    'instability-validity': (instability_validity, {'sigmas': constants.CHECK_SIGMAS}),
    'unit-ball-volume': (unit_ball_cross_check, {'max_euclidean': 50, 'max_taxicab': 20, 'tolerance': 1e-10}),
    'ball-volume-limit': (ball_volume_limit, {'dimension': 10000, 'exponents': (1, 2, 3)}),
    'ez-floor': (ez_floor, {'dimensions': (500, 1000, 2000), 'exponents': (1, 2), 'epsilon': 0.1, 'floor': 0.01}),
    'gamma-ratio': (gamma_ratio_sanity, {'tolerance': 1e-12}),
    'spot-values': (spot_values, {'tolerance': 1e-12}),
}


def run_checks(config: ExperimentConfig, workers: int = 1, manifest: str = '') -> List[dict]:
    """
    Runs every check of the battery.

    :param config: The configuration the Monte Carlo checks run on.
    :type config: ExperimentConfig
    :param workers: Number of worker processes.
    :type workers: int
    :param manifest: The manifest file name recorded in every row.
    :type manifest: str
    :return: One row per check result, keyed by the check columns.
    :rtype: List[dict]
    """
    rows = []
    for name, (check_func, kwargs) in CHECKS.items():
        logging.info(f' Running check {name}')
        for result in check_func(config, workers, **kwargs):
            if result.status == 'failed':
                logging.error(f' Check {result.check} failed: observed {result.observed!r}, '
                              f'threshold {result.threshold!r} ({result.detail})')
            else:
                logging.info(f' Check {result.check} {result.status}: {result.detail}')
            rows.append({'check': result.check, 'status': result.status, 'passed': result.passed,
                         'observed': result.observed, 'threshold': result.threshold, 'detail': result.detail,
                         'seed': config.seed, 'manifest': manifest})
    return rows
