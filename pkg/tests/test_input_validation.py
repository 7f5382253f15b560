import json
import re

import pytest

from nnstabz import input_validation
from nnstabz.input_validation import ConfigurationError, SweepSpec
from nnstabz.montecarlo import ExperimentConfig
from nnstabz.resources import DEFAULT_ESTIMATORS

UNIFORM = {
    'distribution': {'family': 'uniform-cube'},
    'd': 3,
    'dataset_size': {'family': 'constant', 'n': 10},
    'p': 2,
    'epsilon': 0.1,
}


def with_fields(**fields):
    record = json.loads(json.dumps(UNIFORM))
    record.update(fields)
    return record


def test_minimal_config_gets_the_defaults(write_config):
    config = input_validation.parse_config(write_config(UNIFORM))
    assert isinstance(config, ExperimentConfig)
    assert (config.zeta, config.level, config.trials, config.seed, config.lane) == (0.995, 0.95, 2000, 0, 0)
    assert config.query.kind == 'center'
    assert config.estimators == tuple(DEFAULT_ESTIMATORS) == ('instability',)
    assert re.fullmatch('[0-9a-f]{64}', input_validation.config_digest(config))


def test_zeta_outside_its_range_is_rejected():
    with pytest.raises(ConfigurationError) as error:
        input_validation.config_from_record(with_fields(zeta=0.9))
    assert 'zeta' in str(error.value)


def test_json_syntax_errors_carry_their_position(write_config):
    path = write_config(None)
    with open(path, 'w') as config_file:
        config_file.write('{\n  "d": 3,\n  "p": \n}')
    with pytest.raises(ConfigurationError) as error:
        input_validation.parse_config(path)
    assert error.value.line == 4
    assert error.value.column is not None


def test_every_problem_is_reported():
    with pytest.raises(ConfigurationError) as error:
        input_validation.config_from_record(with_fields(p=-1, colour='blue'))
    assert len(error.value.problems) >= 2
    assert any('colour' in problem for problem in error.value.problems)


def test_missing_required_fields():
    with pytest.raises(ConfigurationError) as error:
        input_validation.config_from_record({'d': 3})
    assert sum('required field is missing' in problem for problem in error.value.problems) == 4


def test_density_bounds():
    exponential = with_fields(density_bound={'family': 'exponential', 'base': 2.0})
    with pytest.raises(ConfigurationError) as error:
        input_validation.config_from_record(exponential)
    assert 'sub-exponential' in str(error.value)
    declared = with_fields(density_bound={'family': 'exponential', 'base': 2.0, 'subexponential': False})
    assert input_validation.config_from_record(declared).beta_value() == pytest.approx(8.0)
    slab = with_fields(distribution={'family': 'slab-mixture', 'weight': 0.5}, d=8,
                       density_bound={'family': 'constant', 'c': 1.0})
    with pytest.raises(ConfigurationError):
        input_validation.config_from_record(slab)
    gaussian = with_fields(distribution={'family': 'gaussian'}, density_bound={'family': 'constant', 'c': 2.0})
    with pytest.raises(ConfigurationError):
        input_validation.config_from_record(gaussian)


def test_explicit_queries_must_lie_in_the_support():
    outside = with_fields(query={'kind': 'explicit', 'points': [[0.5, 0.5, 1.5]]})
    with pytest.raises(ConfigurationError):
        input_validation.config_from_record(outside)
    inside = with_fields(query={'kind': 'explicit', 'points': [[0.5, 0.5, 0.5]]})
    assert input_validation.config_from_record(inside).query.points == ((0.5, 0.5, 0.5),)


def test_unknown_estimator_is_rejected():
    with pytest.raises(ConfigurationError):
        input_validation.config_from_record(with_fields(estimators=['instability', 'oracle']))


def test_sweep_expansion_shares_the_seed_and_splits_lanes():
    sweep = input_validation.config_from_record(with_fields(seed=9, sweep={'axis': 'd', 'values': [2, 16, 128, 1024]}))
    assert isinstance(sweep, SweepSpec)
    points = sweep.expand()
    assert [config.d for config in points] == [2, 16, 128, 1024]
    assert [config.seed for config in points] == [9] * 4
    assert [config.lane for config in points] == [0, 1, 2, 3]


def test_geometric_sweeps():
    sweep = input_validation.config_from_record(
        with_fields(sweep={'axis': 'd', 'geometric': {'start': 2, 'ratio': 8, 'count': 4}}))
    assert sweep.values == (2, 16, 128, 1024)
    assert input_validation.geometric_values(0.1, 2, 3, False) == [0.1, 0.2, 0.4]


def test_invalid_sweeps():
    for sweep in ({'axis': 'd', 'values': [16, 2]}, {'axis': 'q', 'values': [1]}, {'axis': 'n', 'values': [1.5]},
                  {'axis': 'zeta', 'values': [0.9, 0.995]}, {'axis': 'd', 'values': []}):
        with pytest.raises(ConfigurationError):
            input_validation.config_from_record(with_fields(sweep=sweep))


def test_other_sweep_axes():
    sweep = input_validation.config_from_record(with_fields(sweep={'axis': 'epsilon', 'values': [0.1, 0.5]}))
    assert [config.epsilon for config in sweep.expand()] == [0.1, 0.5]
    sweep = input_validation.config_from_record(with_fields(sweep={'axis': 'n', 'values': [1, 10]}))
    assert [config.size_rule.realize(config.d) for config in sweep.expand()] == [1, 10]


@pytest.mark.parametrize('record', [
    UNIFORM,
    with_fields(distribution={'family': 'slab-mixture', 'weight': 0.25, 'axis': 2}, omega=0.5,
                estimators=['instability', 'moments'], query={'kind': 'uniform-random', 'count': 3}),
    with_fields(distribution={'family': 'gaussian', 'spectrum': {'kind': 'power', 'exponent': 0.5}, 'mean': 0.0},
                dataset_size={'family': 'polynomial', 'c': 2.0, 'k': 1.0}),
    with_fields(distribution={'family': 'gaussian', 'spectrum': [3.0, 2.0, 1.0], 'mean': [1.0, 0.0, -1.0]},
                query={'kind': 'explicit', 'points': [[0.0, 0.0, 0.0]]}),
    with_fields(density_bound={'family': 'polynomial', 'c': 1.0, 'k': 1.0},
                dataset_size={'family': 'exponential', 'base': 4.4}),
    with_fields(sweep={'axis': 'p', 'values': [1, 2, 3]}),
])
def test_records_round_trip_with_the_same_digest(record, write_config):
    configuration = input_validation.config_from_record(record)
    path = write_config(input_validation.config_to_record(configuration), 'round-trip.json')
    reparsed = input_validation.parse_config(path)
    assert input_validation.config_digest(reparsed) == input_validation.config_digest(configuration)


def test_digest_changes_with_the_seed():
    first = input_validation.config_from_record(UNIFORM)
    second = input_validation.config_from_record(with_fields(seed=1))
    assert input_validation.config_digest(first) != input_validation.config_digest(second)


def test_validate_inputs(tmp_path, write_config):
    path = write_config(UNIFORM)
    assert input_validation.validate_inputs(path, 'bounds', 'csv')
    assert not input_validation.validate_inputs(str(tmp_path / 'missing.json'), 'bounds', 'csv')
    assert not input_validation.validate_inputs(path, 'predict', 'csv')
    assert not input_validation.validate_inputs(path, 'bounds', 'xlsx')
