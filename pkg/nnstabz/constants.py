#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Constants
-----------------

This module contains the constants that are used in the NNSTABZ project.

.. versionadded:: 0.1.0
"""

import os

VERSION = '0.1.0'

# Define the environment variable holding the default worker count
WORKERS_ENV_VAR = 'NNSTABZ_WORKERS'


def get_default_workers() -> int:
    """
    Returns the default number of workers, read from the environment.

    :return: The number of workers to use when none is given on the command line.
    :rtype: int
    """
    value = os.environ.get(WORKERS_ENV_VAR, '1')
    try:
        return max(1, int(value))
    except ValueError:
        return 1


# Define color codes for console output
ANSI_ORANGE = '\033[38;5;208m'
ANSI_GREEN = '\033[38;5;40m'
ANSI_VIOLET = '\033[38;5;141m'
ANSI_RED = '\033[38;5;196m'
ANSI_RESET = '\033[0m'

# Define folder names
RESULTS_FOLDER = 'results'
MANIFEST_FOLDER = 'manifest'
TRIALS_FOLDER = 'trials'

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION_ERROR = 1
EXIT_RUNTIME_ERROR = 2
EXIT_CHECK_FAILURE = 3

# EXPERIMENT DEFAULTS

DEFAULT_ZETA = 0.995
ZETA_LOWER = 0.99
DEFAULT_LEVEL = 0.95
DEFAULT_TRIALS = 2000
DEFAULT_SEED = 0
DEFAULT_N_QUERIES = 50
DEFAULT_BOOTSTRAP_RESAMPLES = 2000
MAX_VALUES_PER_TRIAL = 2 ** 31
SEED_UPPER = 2 ** 64

# Rows of a dataset drawn per block; the draws are sequential so a size-n dataset
# is always a prefix of the size-(n+1) dataset of the same stream.
CHUNK_VALUES = 2 ** 20

# Single-point draws per deviation batch; batch b always uses lane b.
DEVIATION_BATCH = 4096

# Stream purposes, the second entry of every lane path
STREAM_DATASET = 0
STREAM_QUERY_DRAW = 1
STREAM_SINGLE_POINT = 2
STREAM_BOOTSTRAP = 3
STREAM_QUERY_REALIZATION = 4
STREAM_FIXED_DATASET = 5

# Standard errors of slack allowed by the bound-validity battery
CHECK_SIGMAS = 4.0

# Gamma-ratio switch-over from log-gamma differences to the asymptotic expansion
GAMMA_RATIO_EXACT_LIMIT = 1.0e6

# REPORTING

RESULT_COLUMNS = [
    'subcommand', 'axis', 'axis_value', 'estimator', 'query_index',
    'd', 'n', 'log_n', 'p', 'epsilon', 'zeta', 'omega',
    'estimate', 'ci_low', 'ci_high', 'trials', 'excluded', 'method',
    'delta', 'gamma', 'beta', 'deviation_bound', 'instability_lower_bound',
    'ez_ratio_bound', 'stable_volume_bound', 'log_largeness_ratio',
    'deviation_clamped', 'instability_clamped', 'stable_volume_clamped', 'ez_ratio_asymptotic',
    'status', 'seed', 'lane', 'manifest',
]

QUERY_COLUMNS = [
    'query_index', 'stable', 'indeterminate', 'frequency', 'ci_low', 'ci_high', 'trials', 'zeta', 'seed',
    'manifest',
]

TRIAL_COLUMNS = ['query_index', 'trial', 'd_min', 'd_max', 'z', 'unstable', 'seed', 'manifest']

CHECK_COLUMNS = ['check', 'status', 'passed', 'observed', 'threshold', 'detail', 'seed', 'manifest']

PLOT_COLUMNS = ['x', 'y', 'y_lo', 'y_hi', 'bound']

OUTPUT_FORMATS = ['csv', 'json', 'plot-data']
