#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ File Utilities
----------------------

This module provides the file operations of the NNSTABZ application: the run folder structure,
the result emitters (CSV, JSON and plot-data) and the run manifest every output file points to.

CSV cells are written with repr() for floats, so every numeric cell parses back to exactly the
value that was in memory.

.. versionadded:: 0.1.0
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from nnstabz import constants


@dataclass
class RunManifest:
    """
    Provenance of one run.

    Attributes:
    -----------
    config_digest: str
        SHA-256 of the canonical config record.
    stream_algorithm: str
        The random stream identifier, including the numpy version.
    timings: Dict[str, float]
        Wall-clock seconds per operation.
    """
    config_digest: str
    seed: int
    stream_algorithm: str
    version: str
    subcommand: str
    started: str
    finished: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    exit_code: int = constants.EXIT_OK

    @property
    def file_name(self) -> str:
        return f'manifest-{self.config_digest[:12]}.json'


def create_directory(directory_path: str) -> str:
    """
    Creates a directory at the specified path and returns its path.

    :param directory_path: The path to the directory.
    :type directory_path: str
    :return: The path of the created directory.
    :rtype: str
    """
    if not os.path.isdir(directory_path):
        os.makedirs(directory_path)
    return directory_path


def run_folder_structure(output_directory: str, subcommand: str) -> tuple:
    """
    Creates the run folder structure.

    :param output_directory: The directory the run folder is created in.
    :type output_directory: str
    :param subcommand: The subcommand of the run.
    :type subcommand: str
    :return: The paths to the run, results, manifest and trials directories.
    :rtype: tuple
    """
    run_dir = os.path.join(output_directory,
                           'nnstabz-' + subcommand + '-' + datetime.now().strftime('%Y-%m-%d-%H-%M-%S'))
    create_directory(run_dir)
    results_dir = create_directory(os.path.join(run_dir, constants.RESULTS_FOLDER))
    manifest_dir = create_directory(os.path.join(run_dir, constants.MANIFEST_FOLDER))
    trials_dir = create_directory(os.path.join(run_dir, constants.TRIALS_FOLDER))
    return run_dir, results_dir, manifest_dir, trials_dir


def format_cell(value: Any) -> str:
    """Formats one cell; floats use the shortest round-trip decimal."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def json_value(value: Any) -> Any:
    """JSON has no non-finite numbers; those are written as the strings 'nan', 'inf' and '-inf'."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def plot_rows(rows: Sequence[dict]) -> List[dict]:
    """
    Returns the (x, y, y_lo, y_hi, bound) tuples of a set of result rows, ordered by x.

    x is the sweep axis value, or d outside sweeps. y is the estimate, or the headline bound for
    bounds-only rows. Truncation markers are dropped.
    """
    tuples = []
    for row in rows:
        if row.get('status') == 'truncated':
            continue
        estimator = row.get('estimator')
        bound = {'instability': row.get('instability_lower_bound'),
                 'deviation': row.get('deviation_bound'),
                 'expected-z': row.get('ez_ratio_bound'),
                 'stable-fraction': row.get('stable_volume_bound')}.get(estimator, row.get('instability_lower_bound'))
        x = row.get('axis_value') if row.get('axis_value') is not None else row.get('d')
        y = row.get('estimate') if row.get('estimate') is not None else bound
        tuples.append({'x': x, 'y': y, 'y_lo': row.get('ci_low'), 'y_hi': row.get('ci_high'), 'bound': bound})
    return sorted(tuples, key=lambda entry: entry['x'])


def _write_csv(rows: Sequence[dict], columns: List[str], path: str) -> None:
    frame = pd.DataFrame([[format_cell(row.get(column)) for column in columns] for row in rows], columns=columns)
    frame.to_csv(path, index=False)


def emit_results(rows: Sequence[dict], output_format: str, destination: str, stem: str,
                 columns: List[str] = None) -> str:
    """
    Writes result rows in the requested format.

    :param rows: The result rows, keyed by column name.
    :type rows: Sequence[dict]
    :param output_format: One of ``csv``, ``json`` or ``plot-data``.
    :type output_format: str
    :param destination: The directory to write to.
    :type destination: str
    :param stem: The file name without extension.
    :type stem: str
    :param columns: The column order; defaults to the result columns.
    :type columns: List[str]
    :return: The path of the written file.
    :rtype: str
    :raises OSError: If the destination cannot be written.
    """
    if output_format not in constants.OUTPUT_FORMATS:
        raise ValueError(f'Unknown output format: {output_format}')
    columns = columns or constants.RESULT_COLUMNS
    create_directory(destination)

    if output_format == 'csv':
        path = os.path.join(destination, f'{stem}.csv')
        _write_csv(rows, columns, path)
    elif output_format == 'json':
        path = os.path.join(destination, f'{stem}.json')
        with open(path, 'w') as json_file:
            json.dump([{column: json_value(row.get(column)) for column in columns} for row in rows], json_file,
                      indent=2)
    else:
        path = os.path.join(destination, f'{stem}.plot.csv')
        _write_csv(plot_rows(rows), constants.PLOT_COLUMNS, path)

    logging.info(f' {len(rows)} rows written to {path}')
    return path


def write_manifest(manifest: RunManifest, manifest_directory: str) -> str:
    """Writes the run manifest as JSON and returns its path."""
    create_directory(manifest_directory)
    path = os.path.join(manifest_directory, manifest.file_name)
    with open(path, 'w') as manifest_file:
        json.dump(asdict(manifest), manifest_file, indent=2, sort_keys=True)
    logging.info(f' Run manifest written to {path}')
    return path
