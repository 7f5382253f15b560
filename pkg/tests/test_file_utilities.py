import json
import os

import pandas as pd
import pytest

from nnstabz import constants
from nnstabz import file_utilities
from nnstabz.file_utilities import RunManifest


def read_cells(path):
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def test_empty_results_write_a_header_only_csv(tmp_path):
    path = file_utilities.emit_results([], 'csv', str(tmp_path), 'bounds-empty')
    with open(path) as result_file:
        lines = result_file.read().splitlines()
    assert lines == [','.join(constants.RESULT_COLUMNS)]


def test_csv_and_json_hold_the_same_rows(tmp_path):
    rows = [{'subcommand': 'estimate', 'd': 4, 'estimate': 0.25, 'ci_low': 0.2, 'ci_high': 0.3, 'status': 'ok'},
            {'subcommand': 'estimate', 'd': 8, 'estimate': 0.5, 'ci_low': 0.4, 'ci_high': 0.6, 'status': 'ok'}]
    csv_path = file_utilities.emit_results(rows, 'csv', str(tmp_path), 'estimate-x')
    json_path = file_utilities.emit_results(rows, 'json', str(tmp_path), 'estimate-x')
    with open(json_path) as json_file:
        records = json.load(json_file)
    assert len(read_cells(csv_path)) == len(records) == 2
    assert list(records[0]) == constants.RESULT_COLUMNS


def test_float_cells_round_trip_exactly(tmp_path):
    value = 0.1 + 0.2
    path = file_utilities.emit_results([{'estimate': value, 'deviation_clamped': True, 'omega': None}], 'csv',
                                       str(tmp_path), 'round-trip')
    cells = read_cells(path).iloc[0]
    assert float(cells['estimate']) == value
    assert cells['deviation_clamped'] == 'true'
    assert cells['omega'] == ''


def test_non_finite_values_in_json(tmp_path):
    path = file_utilities.emit_results([{'log_largeness_ratio': float('-inf')}], 'json', str(tmp_path), 'inf')
    with open(path) as json_file:
        assert json.load(json_file)[0]['log_largeness_ratio'] == '-inf'


def test_plot_data_is_ordered_by_x(tmp_path):
    rows = [{'axis_value': value, 'estimator': 'instability', 'estimate': value / 2048, 'ci_low': 0.0, 'ci_high': 1.0,
             'instability_lower_bound': 0.0} for value in (1024, 2, 128, 16)]
    rows.append({'axis_value': 4096, 'status': 'truncated'})
    path = file_utilities.emit_results(rows, 'plot-data', str(tmp_path), 'sweep-x')
    assert path.endswith('.plot.csv')
    frame = read_cells(path)
    assert list(frame.columns) == constants.PLOT_COLUMNS
    assert frame['x'].tolist() == ['2', '16', '128', '1024']


def test_plot_rows_fall_back_to_the_bound():
    tuples = file_utilities.plot_rows([{'d': 10, 'instability_lower_bound': 0.75}])
    assert tuples == [{'x': 10, 'y': 0.75, 'y_lo': None, 'y_hi': None, 'bound': 0.75}]


def test_unknown_format_is_rejected(tmp_path):
    with pytest.raises(ValueError):
        file_utilities.emit_results([], 'xlsx', str(tmp_path), 'x')


def test_unwritable_destination_raises(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('')
    with pytest.raises(OSError):
        file_utilities.emit_results([], 'csv', str(blocker / 'results'), 'x')


def test_run_folder_and_manifest(tmp_path):
    run_dir, results_dir, manifest_dir, trials_dir = file_utilities.run_folder_structure(str(tmp_path), 'check')
    assert all(os.path.isdir(path) for path in (run_dir, results_dir, manifest_dir, trials_dir))
    assert os.path.basename(run_dir).startswith('nnstabz-check-')
    manifest = RunManifest(config_digest='ab' * 32, seed=7, stream_algorithm='philox', version=constants.VERSION,
                           subcommand='check', started='now')
    path = file_utilities.write_manifest(manifest, manifest_dir)
    assert os.path.basename(path) == 'manifest-' + 'ab' * 6 + '.json'
    with open(path) as manifest_file:
        recorded = json.load(manifest_file)
    assert recorded['config_digest'] == 'ab' * 32 and recorded['seed'] == 7
