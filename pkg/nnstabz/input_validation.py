#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
This module contains functions that validate the user inputs for the NNSTABZ project.

It checks the command-line parameters (config file, subcommand, output format) and turns a JSON
config file into a fully validated ExperimentConfig, or a SweepSpec wrapping one. Every violated
invariant is collected before the config is rejected, so one run reports all of them.

.. versionadded:: 0.1.0
"""

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple, Union

import emoji

from nnstabz import constants
from nnstabz import distributions
from nnstabz.bounds import DatasetSizeRule
from nnstabz.montecarlo import ExperimentConfig
from nnstabz.resources import (AVAILABLE_SUBCOMMANDS, DENSITY_BOUND_FAMILIES, DEFAULT_ESTIMATORS, DISTRIBUTION_FAMILIES,
                               ESTIMATORS, QUERY_KINDS, SIZE_RULE_FAMILIES, SPECTRUM_KINDS, SWEEP_AXES)

TOP_LEVEL_FIELDS = ['distribution', 'd', 'dataset_size', 'p', 'epsilon', 'query', 'trials', 'seed', 'zeta', 'level',
                    'lane', 'density_bound', 'omega', 'n_queries', 'estimators', 'max_values_per_trial', 'sweep']


class ConfigurationError(ValueError):
    """
    A config file that cannot be used.

    Attributes:
    -----------
    problems: List[str]
        Every violated invariant, one message each.
    line, column: int
        Position of a JSON syntax error, if that is the cause.
    """

    def __init__(self, problems: List[str], line: Optional[int] = None, column: Optional[int] = None):
        self.problems = list(problems)
        self.line = line
        self.column = column
        super().__init__('; '.join(self.problems))


@dataclass(frozen=True)
class SweepSpec:
    """
    A base configuration and the strictly increasing values of one axis to sweep it along.
    """
    axis: str
    values: Tuple[float, ...]
    base: ExperimentConfig

    def __post_init__(self):
        problems = _sweep_problems(self.axis, list(self.values), self.base)
        if problems:
            raise ConfigurationError(problems)
        object.__setattr__(self, 'values', tuple(self.values))

    def expand(self) -> List[ExperimentConfig]:
        """
        Returns one configuration per sweep value.

        All derived configs share the base seed; sweep point k runs on lane base.lane + k.
        """
        return [apply_axis(self.base, self.axis, value, self.base.lane + index)
                for index, value in enumerate(self.values)]


def apply_axis(config: ExperimentConfig, axis: str, value: float, lane: int) -> ExperimentConfig:
    """Returns the configuration with one axis set to the given value."""
    if axis == 'd':
        return replace(config, spec=distributions.resize(config.spec, int(value)), lane=lane)
    if axis == 'n':
        return replace(config, size_rule=DatasetSizeRule('constant', n=int(value)), lane=lane)
    return replace(config, **{axis: float(value)}, lane=lane)


def _sweep_problems(axis: str, values: list, base: ExperimentConfig) -> List[str]:
    problems = []
    if axis not in SWEEP_AXES:
        return [f'sweep axis must be one of {SWEEP_AXES}, got {axis!r}']
    if len(values) == 0:
        return ['sweep needs at least one value']
    if any(not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value)
           for value in values):
        return ['sweep values must be finite numbers']
    if any(later <= earlier for earlier, later in zip(values, values[1:])):
        problems.append(f'sweep values must be strictly increasing, got {values}')
    if axis in ('d', 'n') and any(int(value) != value or value < 1 for value in values):
        problems.append(f'sweep values along {axis} must be positive integers')
    if axis == 'd':
        if isinstance(base.spec, distributions.GaussianEllipsoid) and (base.spec.spectrum_rule is None
                                                                       or base.spec.mean_value is None):
            problems.append('a d-sweep needs a gaussian spectrum rule and a scalar mean')
        if base.query.kind == 'explicit':
            problems.append('a d-sweep cannot use explicit query points')
    if axis in ('epsilon', 'p') and any(value <= 0 for value in values):
        problems.append(f'sweep values along {axis} must be positive')
    if axis == 'omega' and any(not 0 <= value < 1 for value in values):
        problems.append('sweep values along omega must lie in [0, 1)')
    if axis == 'zeta' and any(not constants.ZETA_LOWER < value < 1 for value in values):
        problems.append(f'sweep values along zeta must lie in ({constants.ZETA_LOWER}, 1)')
    return problems


def geometric_values(start: float, ratio: float, count: int, integral: bool) -> List[float]:
    """Returns start * ratio^k for k < count, rounded to integers along integral axes."""
    if start <= 0 or ratio <= 1 or count < 1:
        raise ValueError(f'geometric sweeps need start > 0, ratio > 1 and count >= 1, got {start}, {ratio}, {count}')
    values = [start * ratio ** k for k in range(count)]
    if integral:
        return [int(round(value)) for value in values]
    return values


def print_error(message: str):
    """Prints an error message with standard formatting."""
    print(f"{emoji.emojize(':cross_mark:')} {constants.ANSI_RED} {message} {constants.ANSI_RESET}")


def validate_inputs(config_path: str, subcommand: str, output_format: str) -> bool:
    """
    Validates the command-line inputs for the main function.

    :param config_path: The path to the JSON config file.
    :type config_path: str
    :param subcommand: The subcommand to run.
    :type subcommand: str
    :param output_format: The requested output format.
    :type output_format: str
    :return: True if the inputs are valid, False otherwise.
    :rtype: bool
    """
    return (validate_config_file(config_path) and validate_subcommand(subcommand)
            and validate_output_format(output_format))


def validate_config_file(config_path: str) -> bool:
    """Validates if the config file exists."""
    if os.path.isfile(config_path):
        return True
    message = f"The config file {config_path} does not exist."
    logging.error(message)
    print_error(message)
    return False


def validate_subcommand(subcommand: str) -> bool:
    """Validates if the subcommand is available."""
    if subcommand in AVAILABLE_SUBCOMMANDS:
        return True
    message = f"The subcommand {subcommand} is invalid."
    logging.error(message)
    print_error(message)
    return False


def validate_output_format(output_format: str) -> bool:
    if output_format in constants.OUTPUT_FORMATS:
        return True
    message = f"The output format {output_format} is invalid."
    logging.error(message)
    print_error(message)
    return False


def _number(record: dict, key: str, default: Any, problems: List[str], integral: bool = False) -> Any:
    value = record.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f'{key}: expected a number, got {value!r}')
        return default
    if integral and int(value) != value:
        problems.append(f'{key}: expected an integer, got {value!r}')
        return default
    return int(value) if integral else value


def _unknown_keys(record: dict, allowed: List[str], where: str, problems: List[str]) -> None:
    for key in record:
        if key not in allowed:
            problems.append(f'{where}: unknown field {key!r}')


def _parse_distribution(record: dict, dimension: Optional[int], problems: List[str]):
    family = record.get('family')
    if family not in DISTRIBUTION_FAMILIES:
        problems.append(f'distribution.family must be one of {list(DISTRIBUTION_FAMILIES)}, got {family!r}')
        return None
    _unknown_keys(record, ['family'] + DISTRIBUTION_FAMILIES[family], 'distribution', problems)

    if family == 'gaussian':
        spectrum = record.get('spectrum', 'ones')
        if isinstance(spectrum, dict):
            _unknown_keys(spectrum, ['kind', 'exponent', 'scale'], 'distribution.spectrum', problems)
            if spectrum.get('kind') not in SPECTRUM_KINDS:
                problems.append(f'distribution.spectrum.kind must be one of {SPECTRUM_KINDS}')
                return None
            spectrum = distributions.SpectrumRule(kind=spectrum['kind'], exponent=spectrum.get('exponent', 0.0),
                                                  scale=spectrum.get('scale', 1.0))
        elif isinstance(spectrum, str) and spectrum not in SPECTRUM_KINDS:
            problems.append(f'distribution.spectrum must be one of {SPECTRUM_KINDS} or a list, got {spectrum!r}')
            return None
        explicit = isinstance(spectrum, list)
        if not explicit and dimension is None:
            problems.append('d is required unless the gaussian spectrum is given explicitly')
            return None
        if explicit and dimension is not None and len(spectrum) != dimension:
            problems.append(f'd = {dimension} but the explicit spectrum has {len(spectrum)} entries')
            return None
        return distributions.make_gaussian(dimension or len(spectrum), spectrum, record.get('mean', 0.0))

    if dimension is None:
        problems.append(f'd is required for the {family} family')
        return None
    if family == 'uniform-cube':
        return distributions.UniformCube(dimension=dimension)
    return distributions.SlabMixture(dimension=dimension, weight=record.get('weight', 0.0),
                                     axis=record.get('axis', 0))


def _parse_size_rule(record: dict, problems: List[str]) -> Optional[DatasetSizeRule]:
    family = record.get('family')
    if family not in SIZE_RULE_FAMILIES:
        problems.append(f'dataset_size.family must be one of {list(SIZE_RULE_FAMILIES)}, got {family!r}')
        return None
    _unknown_keys(record, ['family'] + SIZE_RULE_FAMILIES[family], 'dataset_size', problems)
    return DatasetSizeRule(family, **{key: record[key] for key in SIZE_RULE_FAMILIES[family] if key in record})


def _parse_density_bound(record: dict, spec, problems: List[str]) -> Optional[distributions.DensityBoundRule]:
    family = record.get('family', 'witness')
    if family not in DENSITY_BOUND_FAMILIES:
        problems.append(f'density_bound.family must be one of {DENSITY_BOUND_FAMILIES}, got {family!r}')
        return None
    _unknown_keys(record, ['family', 'c', 'k', 'base', 'subexponential'], 'density_bound', problems)
    if spec is not None and not distributions.is_cube_supported(spec):
        problems.append('density_bound only applies to cube-supported laws')
        return None
    if family == 'witness':
        return None
    rule = distributions.DensityBoundRule(family, **{key: record[key] for key in ('c', 'k', 'base') if key in record})
    if record.get('subexponential', True) and not rule.is_subexponential:
        problems.append('density_bound is claimed sub-exponential but its evaluator grows exponentially in d')
    if spec is not None and rule.evaluate(spec.dimension) < distributions.density_sup(spec):
        problems.append(f'density_bound gives beta(d) = {rule.evaluate(spec.dimension):.6g}, below the density '
                        f'supremum {distributions.density_sup(spec):.6g}')
    return rule


def _parse_query(record: dict, problems: List[str]) -> Optional[distributions.QuerySpec]:
    kind = record.get('kind', 'center')
    if kind not in QUERY_KINDS:
        problems.append(f'query.kind must be one of {QUERY_KINDS}, got {kind!r}')
        return None
    _unknown_keys(record, ['kind', 'count', 'points'], 'query', problems)
    points = tuple(tuple(float(value) for value in point) for point in record.get('points', ()))
    return distributions.QuerySpec(kind=kind, count=record.get('count', 1), points=points)


def _guarded(problems: List[str], where: str, build, *args):
    try:
        return build(*args)
    except (ValueError, TypeError, OverflowError) as error:
        problems.append(f'{where}: {error}')
        return None


def config_from_record(record: Dict[str, Any]) -> Union[ExperimentConfig, SweepSpec]:
    """
    Builds a validated configuration from a parsed config record.

    :param record: The decoded JSON object.
    :type record: Dict[str, Any]
    :return: The ExperimentConfig, or a SweepSpec when the record carries a ``sweep``.
    :rtype: Union[ExperimentConfig, SweepSpec]
    :raises ConfigurationError: Listing every violated invariant.
    """
    if not isinstance(record, dict):
        raise ConfigurationError(['the config must be a JSON object'])
    problems: List[str] = []
    _unknown_keys(record, TOP_LEVEL_FIELDS, 'config', problems)

    dimension = _number(record, 'd', None, problems, integral=True)
    for key in ('distribution', 'dataset_size', 'p', 'epsilon'):
        if key not in record:
            problems.append(f'{key}: required field is missing')
    spec = _guarded(problems, 'distribution', _parse_distribution, record.get('distribution', {}), dimension,
                    problems) if 'distribution' in record else None
    size_rule = _guarded(problems, 'dataset_size', _parse_size_rule, record.get('dataset_size', {}),
                         problems) if 'dataset_size' in record else None
    density_bound = _guarded(problems, 'density_bound', _parse_density_bound, record['density_bound'], spec,
                             problems) if 'density_bound' in record else None
    query = _guarded(problems, 'query', _parse_query, record.get('query', {}), problems)

    estimators = record.get('estimators', list(DEFAULT_ESTIMATORS))
    if not isinstance(estimators, list) or any(name not in ESTIMATORS for name in estimators):
        problems.append(f'estimators must be a subset of {ESTIMATORS}, got {estimators!r}')
        estimators = list(DEFAULT_ESTIMATORS)

    fields = dict(
        p=_number(record, 'p', 2.0, problems),
        epsilon=_number(record, 'epsilon', 0.1, problems),
        trials=_number(record, 'trials', constants.DEFAULT_TRIALS, problems, integral=True),
        seed=_number(record, 'seed', constants.DEFAULT_SEED, problems, integral=True),
        zeta=_number(record, 'zeta', constants.DEFAULT_ZETA, problems),
        level=_number(record, 'level', constants.DEFAULT_LEVEL, problems),
        lane=_number(record, 'lane', 0, problems, integral=True),
        omega=_number(record, 'omega', None, problems),
        n_queries=_number(record, 'n_queries', constants.DEFAULT_N_QUERIES, problems, integral=True),
        max_values_per_trial=_number(record, 'max_values_per_trial', constants.MAX_VALUES_PER_TRIAL, problems,
                                     integral=True),
    )

    config = None
    if spec is not None and size_rule is not None and query is not None:
        config = _guarded(problems, 'config', lambda: ExperimentConfig(
            spec=spec, size_rule=size_rule, query=query, density_bound=density_bound, estimators=tuple(estimators),
            **fields))
    if config is not None and query.kind == 'explicit':
        for index, point in enumerate(query.points):
            if not distributions.in_support(spec, point):
                problems.append(f'query.points[{index}] is not a point of the {spec.family} support in d={spec.dimension}')

    sweep = None
    if 'sweep' in record and config is not None:
        sweep = _guarded(problems, 'sweep', _parse_sweep, record['sweep'], config, problems)

    if problems:
        for problem in problems:
            logging.error(f' Config validation: {problem}')
        raise ConfigurationError(problems)
    return sweep if sweep is not None else config


def _parse_sweep(record: dict, base: ExperimentConfig, problems: List[str]) -> Optional[SweepSpec]:
    _unknown_keys(record, ['axis', 'values', 'geometric'], 'sweep', problems)
    axis = record.get('axis')
    if 'geometric' in record:
        progression = record['geometric']
        values = geometric_values(progression.get('start', 1), progression.get('ratio', 2),
                                  progression.get('count', 1), axis in ('d', 'n'))
    else:
        values = record.get('values', [])
    sweep_problems = _sweep_problems(axis, values, base)
    if sweep_problems:
        problems.extend(sweep_problems)
        return None
    return SweepSpec(axis=axis, values=tuple(values), base=base)


def parse_config(path: str) -> Union[ExperimentConfig, SweepSpec]:
    """
    Reads and validates a JSON config file, filling in the defaults (zeta = 0.995, level = 0.95, ...).

    :param path: The path to the config file.
    :type path: str
    :return: The validated configuration.
    :rtype: Union[ExperimentConfig, SweepSpec]
    :raises ConfigurationError: On a JSON syntax error (with line and column) or any semantic violation.
    """
    with open(path, 'r') as config_file:
        text = config_file.read()
    try:
        record = json.loads(text)
    except json.JSONDecodeError as error:
        message = f'{path}: line {error.lineno}, column {error.colno}: {error.msg}'
        logging.error(f' {message}')
        raise ConfigurationError([message], line=error.lineno, column=error.colno) from error
    configuration = config_from_record(record)
    logging.info(f' Config {path} parsed; digest {config_digest(configuration)}')
    return configuration


def _spec_record(spec) -> Dict[str, Any]:
    if isinstance(spec, distributions.UniformCube):
        return {'family': spec.family}
    if isinstance(spec, distributions.SlabMixture):
        return {'family': spec.family, 'weight': spec.weight, 'axis': spec.axis}
    if spec.spectrum_rule is not None:
        spectrum = {'kind': spec.spectrum_rule.kind, 'exponent': spec.spectrum_rule.exponent,
                    'scale': spec.spectrum_rule.scale}
    else:
        spectrum = [float(value) for value in spec.stddevs]
    mean = spec.mean_value if spec.mean_value is not None else [float(value) for value in spec.mean]
    return {'family': spec.family, 'spectrum': spectrum, 'mean': mean}


def config_to_record(configuration: Union[ExperimentConfig, SweepSpec]) -> Dict[str, Any]:
    """
    Returns the JSON record of a configuration, the inverse of config_from_record.

    :param configuration: An ExperimentConfig or a SweepSpec.
    :return: A record that parses back to an identical configuration.
    :rtype: Dict[str, Any]
    """
    config = configuration.base if isinstance(configuration, SweepSpec) else configuration
    size_rule = config.size_rule
    record = {
        'distribution': _spec_record(config.spec),
        'd': config.d,
        'dataset_size': {'family': size_rule.family,
                         **{key: getattr(size_rule, key) for key in SIZE_RULE_FAMILIES[size_rule.family]}},
        'p': config.p,
        'epsilon': config.epsilon,
        'query': {'kind': config.query.kind},
        'trials': config.trials,
        'seed': config.seed,
        'zeta': config.zeta,
        'level': config.level,
        'lane': config.lane,
        'omega': config.omega,
        'n_queries': config.n_queries,
        'estimators': list(config.estimators),
        'max_values_per_trial': config.max_values_per_trial,
    }
    if config.query.kind == 'uniform-random':
        record['query']['count'] = config.query.count
    if config.query.kind == 'explicit':
        record['query']['points'] = [list(point) for point in config.query.points]
    if config.density_bound is not None:
        rule = config.density_bound
        record['density_bound'] = {'family': rule.family, 'c': rule.c, 'k': rule.k, 'base': rule.base,
                                   'subexponential': rule.is_subexponential}
    if isinstance(configuration, SweepSpec):
        record['sweep'] = {'axis': configuration.axis, 'values': list(configuration.values)}
    return record


def config_digest(configuration: Union[ExperimentConfig, SweepSpec]) -> str:
    """Returns the SHA-256 of the canonical JSON record (sorted keys, no whitespace)."""
    canonical = json.dumps(config_to_record(configuration), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
