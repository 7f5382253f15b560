#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Experiments
-------------------

This module contains the workflows behind the NNSTABZ subcommands. Each workflow turns a validated
configuration into result rows keyed by the result column names; writing them is left to the caller.

- ``bounds``: one BoundReport row per query point.
- ``estimate``: one row per estimator and query point.
- ``stable-region``: the stable fraction, plus one record per classified query.
- ``sweep``: exactly one row per sweep value, or the rows so far and a truncation marker.
- ``check``: the bound-validity battery of ``nnstabz.check_suite``.

.. versionadded:: 0.1.0
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from nnstabz import bounds
from nnstabz import check_suite
from nnstabz import constants
from nnstabz import distributions
from nnstabz import montecarlo
from nnstabz.input_validation import SweepSpec
from nnstabz.montecarlo import EstimateWithCI, ExperimentConfig


@dataclass
class RunResult:
    """
    The outcome of one workflow.

    Attributes:
    -----------
    rows: List[dict]
        The result rows, in output order.
    tables: Dict[str, Tuple[List[dict], List[str]]]
        Extra tables by name (per-query records, per-trial records, check rows) with their columns.
    error: BaseException
        The failure that truncated a sweep, if any.
    """
    subcommand: str
    rows: List[dict] = field(default_factory=list)
    columns: List[str] = field(default_factory=lambda: list(constants.RESULT_COLUMNS))
    tables: Dict[str, Tuple[List[dict], List[str]]] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    exit_code: int = constants.EXIT_OK
    error: Optional[BaseException] = None


def _estimate_fields(estimate: EstimateWithCI) -> dict:
    return {'estimate': estimate.estimate, 'ci_low': estimate.ci_low, 'ci_high': estimate.ci_high,
            'trials': estimate.trials, 'excluded': estimate.excluded, 'method': estimate.method}


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, subcommand: str, workers: int = 1, manifest: str = '',
                 trial_records: bool = False, axis: Optional[str] = None, axis_value: Optional[float] = None):
        self.config = config
        self.subcommand = subcommand
        self.workers = workers
        self.manifest = manifest
        self.trial_records = trial_records
        self.axis = axis
        self.axis_value = axis_value
        self.timings: Dict[str, float] = {}
        self.trial_rows: List[dict] = []

    def _timed(self, operation: str, function: Callable, *args, **kwargs):
        start = time.perf_counter()
        try:
            return function(*args, **kwargs)
        finally:
            self.timings[operation] = self.timings.get(operation, 0.0) + time.perf_counter() - start

    def _base_row(self) -> dict:
        config = self.config
        log_n = config.size_rule.log_n(config.d)
        return {'subcommand': self.subcommand, 'axis': self.axis, 'axis_value': self.axis_value, 'd': config.d,
                'n': config.size_rule.realize(config.d) if log_n < 50 else None, 'log_n': log_n, 'p': config.p,
                'epsilon': config.epsilon, 'zeta': config.zeta, 'omega': config.omega, 'seed': config.seed,
                'lane': config.lane, 'manifest': self.manifest, 'status': 'ok'}

    def query_points(self) -> List[np.ndarray]:
        stream = montecarlo.derive_stream(self.config.seed, (self.config.lane, constants.STREAM_QUERY_REALIZATION))
        return distributions.realize_queries(self.config.query, self.config.spec, stream)

    def _bound_fields(self, query: np.ndarray) -> dict:
        try:
            return self._timed('bounds', bounds.build_bound_report, self.config, query).to_row()
        except ValueError as error:
            logging.warning(f' No closed-form bound for this configuration: {error}')
            return {}

    def bound_rows(self) -> List[dict]:
        """Returns one BoundReport row per query point; unsupported configurations raise ValueError."""
        rows = []
        for index, query in enumerate(self.query_points()):
            report = self._timed('bounds', bounds.build_bound_report, self.config, query)
            rows.append({**self._base_row(), **report.to_row(), 'query_index': index})
        return rows

    def _row(self, estimator: str, query_index: Optional[int], estimate: EstimateWithCI, query=None) -> dict:
        bound_fields = self._bound_fields(query) if query is not None else {}
        return {**self._base_row(), **bound_fields, 'estimator': estimator, 'query_index': query_index,
                **_estimate_fields(estimate)}

    def _instability(self, queries: List[np.ndarray]) -> List[dict]:
        rows = []
        for index, query in enumerate(queries):
            outcomes = self._timed('instability', montecarlo.run_trials, self.config, query, index, self.workers)
            if self.trial_records:
                self.trial_rows.extend({'query_index': index, 'trial': trial, 'd_min': outcome.d_min,
                                        'd_max': outcome.d_max, 'z': outcome.z, 'unstable': outcome.unstable,
                                        'seed': self.config.seed, 'manifest': self.manifest}
                                       for trial, outcome in enumerate(outcomes))
            rows.append(self._row('instability', index, montecarlo.summarize_instability(outcomes, self.config),
                                  query))
        return rows

    def _deviation(self, queries: List[np.ndarray]) -> List[dict]:
        rows = []
        config = self.config
        for index, query in enumerate(queries):
            report = bounds.build_bound_report(config, query)
            estimate = self._timed('deviation', montecarlo.estimate_deviation_probability, config.spec, query,
                                   config.p, report.gamma, report.delta_value, config.trials, config.seed,
                                   config.level, self.workers, config.lane)
            rows.append({**self._base_row(), **report.to_row(), 'estimator': 'deviation', 'query_index': index,
                         **_estimate_fields(estimate)})
        return rows

    def _expected_z(self, queries: List[np.ndarray]) -> List[dict]:
        estimate = self._timed('expected-z', montecarlo.estimate_expected_z_ratio, self.config, self.workers)
        return [self._row('expected-z', None, estimate, queries[0])]

    def _relative_variance(self, queries: List[np.ndarray]) -> List[dict]:
        config = self.config
        return [self._row('relative-variance', index,
                          self._timed('relative-variance', montecarlo.estimate_relative_variance, config.spec, query,
                                      config.p, config.trials, config.seed, config.level, config.lane))
                for index, query in enumerate(queries)]

    def _relative_contrast(self, queries: List[np.ndarray]) -> List[dict]:
        return [self._row('relative-contrast', index,
                          self._timed('relative-contrast', montecarlo.estimate_relative_contrast, self.config, query,
                                      index, self.workers))
                for index, query in enumerate(queries)]

    def _moments(self, queries: List[np.ndarray]) -> List[dict]:
        config = self.config
        rows = []
        for index, query in enumerate(queries):
            moments = self._timed('moments', montecarlo.estimate_squared_distance_moments, config.spec, query,
                                  config.p, config.trials, config.seed, config.level, config.lane)
            rows.append(self._row('moments-mean', index, moments.mean))
            rows.append(self._row('moments-variance', index, moments.variance))
        return rows

    def _fixed_dataset(self, queries: List[np.ndarray]) -> List[dict]:
        estimate = self._timed('fixed-dataset', montecarlo.estimate_instability_fixed_dataset, self.config)
        return [self._row('fixed-dataset', None, estimate)]

    def estimate_rows(self) -> List[dict]:
        """Runs every configured estimator; rows come out in estimator order, then query order."""
        if not self.config.estimators:
            raise ValueError('estimate needs at least one estimator in the config')
        queries = self.query_points()
        rows = []
        for name in self.config.estimators:
            logging.info(f' Running estimator {name} on {len(queries)} query point(s)')
            rows.extend(ESTIMATOR_WORKFLOWS[name](self, queries))
        return rows

    def stable_region_rows(self) -> Tuple[List[dict], List[dict]]:
        """Returns the stable-fraction rows and the per-query classification records."""
        config = self.config
        region = self._timed('stable-region', montecarlo.estimate_stable_fraction, config, self.workers)
        center = np.full(config.d, 0.5)
        rows = [self._row('stable-fraction', None, region.stable_fraction, center)]
        decisive = [record for record in region.classifications if not record.indeterminate]
        if decisive:
            stable = sum(1 for record in decisive if record.stable)
            low, high = montecarlo.wilson_interval(stable, len(decisive), config.level)
            rows.append(self._row('stable-fraction-decisive', None,
                                  EstimateWithCI(estimate=region.decisive_fraction, ci_low=low, ci_high=high,
                                                 trials=len(decisive), seed=config.seed, method='wilson',
                                                 excluded=region.indeterminate)))
        query_rows = [{'query_index': record.query_index, 'stable': record.stable,
                       'indeterminate': record.indeterminate, 'frequency': record.frequency,
                       'ci_low': record.ci_low, 'ci_high': record.ci_high, 'trials': record.trials,
                       'zeta': record.zeta, 'seed': config.seed, 'manifest': self.manifest}
                      for record in region.classifications]
        return rows, query_rows

    def sweep_row(self) -> dict:
        """
        Returns the single row of one sweep point: the bounds at the first query point, merged with
        the first configured estimator's estimate at that point.
        """
        queries = self.query_points()
        if not self.config.estimators:
            return {**self._base_row(), **self._bound_fields(queries[0]), 'query_index': 0}
        return ESTIMATOR_WORKFLOWS[self.config.estimators[0]](self, queries[:1])[0]


ESTIMATOR_WORKFLOWS = {
    'instability': ExperimentRunner._instability,
    'deviation': ExperimentRunner._deviation,
    'expected-z': ExperimentRunner._expected_z,
    'relative-variance': ExperimentRunner._relative_variance,
    'relative-contrast': ExperimentRunner._relative_contrast,
    'moments': ExperimentRunner._moments,
    'fixed-dataset': ExperimentRunner._fixed_dataset,
}


def run_sweep(sweep: SweepSpec, workers: int = 1, manifest: str = '',
              on_point: Optional[Callable[[int, float], None]] = None) -> RunResult:
    """
    Runs every point of a sweep in sweep order.

    :param sweep: The sweep specification.
    :type sweep: SweepSpec
    :param workers: Number of worker processes used inside each point.
    :type workers: int
    :param manifest: The manifest file name recorded in every row.
    :type manifest: str
    :param on_point: Called with (index, value) after each finished point.
    :return: k rows for k values, or the finished rows plus a truncation marker and the error.
    :rtype: RunResult
    """
    result = RunResult(subcommand='sweep')
    for index, (value, config) in enumerate(zip(sweep.values, sweep.expand())):
        runner = ExperimentRunner(config, 'sweep', workers, manifest, axis=sweep.axis, axis_value=value)
        try:
            result.rows.append(runner.sweep_row())
        except Exception as error:
            logging.error(f' Sweep truncated at {sweep.axis}={value}: {error}')
            result.rows.append({'subcommand': 'sweep', 'axis': sweep.axis, 'axis_value': value, 'status': 'truncated',
                                'seed': config.seed, 'lane': config.lane, 'manifest': manifest})
            result.error = error
            result.exit_code = constants.EXIT_VALIDATION_ERROR if isinstance(error, ValueError) \
                else constants.EXIT_RUNTIME_ERROR
            break
        finally:
            for operation, seconds in runner.timings.items():
                result.timings[operation] = result.timings.get(operation, 0.0) + seconds
        if on_point is not None:
            on_point(index, value)
    return result


def run_workflow(subcommand: str, configuration: Union[ExperimentConfig, SweepSpec], workers: int = 1,
                 manifest: str = '', trial_records: bool = False,
                 on_point: Optional[Callable[[int, float], None]] = None) -> RunResult:
    """
    Runs one subcommand on a parsed configuration.

    :param subcommand: One of ``bounds``, ``estimate``, ``stable-region``, ``sweep`` or ``check``.
    :type subcommand: str
    :param configuration: The parsed configuration; ``sweep`` needs a SweepSpec.
    :param workers: Number of worker processes.
    :type workers: int
    :param manifest: The manifest file name recorded in every row.
    :type manifest: str
    :param trial_records: Whether ``estimate`` keeps the per-trial records.
    :type trial_records: bool
    :return: The rows, extra tables and timings.
    :rtype: RunResult
    """
    if subcommand == 'sweep':
        if not isinstance(configuration, SweepSpec):
            raise ValueError('sweep needs a config with a "sweep" section')
        return run_sweep(configuration, workers, manifest, on_point)

    config = configuration.base if isinstance(configuration, SweepSpec) else configuration
    result = RunResult(subcommand=subcommand)
    runner = ExperimentRunner(config, subcommand, workers, manifest, trial_records)
    if subcommand == 'bounds':
        result.rows = runner.bound_rows()
    elif subcommand == 'estimate':
        result.rows = runner.estimate_rows()
        if trial_records:
            result.tables['trials'] = (runner.trial_rows, constants.TRIAL_COLUMNS)
    elif subcommand == 'stable-region':
        result.rows, query_rows = runner.stable_region_rows()
        result.tables['queries'] = (query_rows, constants.QUERY_COLUMNS)
    elif subcommand == 'check':
        result.rows = check_suite.run_checks(config, workers, manifest)
        result.columns = list(constants.CHECK_COLUMNS)
        if any(row['status'] == 'failed' for row in result.rows):
            result.exit_code = constants.EXIT_CHECK_FAILURE
    else:
        raise ValueError(f'Unknown subcommand: {subcommand}')
    result.timings.update(runner.timings)
    return result
