#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
NNSTABZ: Nearest-Neighbor Stability Laboratory
----------------------------------------------

This module, `nnstabz.py`, serves as the main entry point for the NNSTABZ toolkit.
It evaluates the closed-form instability bounds of nearest-neighbor queries in high dimensions
and checks them against reproducible Monte Carlo estimates.

Notes
-----
.. note::
   For a full understanding of the capabilities and functionalities of this module,
   refer to the individual function and class docstrings.

Examples
--------
To use this module, you can either import it into another script or run it directly:

.. code-block:: python

    from nnstabz import input_validation, nnstabz
    config = input_validation.parse_config('uniform.json')
    exit_code, run_dir = nnstabz.run('estimate', config, '/tmp/runs', workers=8)

or:

.. code-block:: bash

    $ nnstabz estimate -c uniform.json -o /tmp/runs -w 8

See Also
--------
constants : Module containing constant values used throughout the toolkit.
display : Module responsible for displaying information and graphics.
experiments : The workflows behind each subcommand.
input_validation : Config parsing and validation.
file_utilities : Run folders, result emitters and run manifests.

"""

__version__ = "0.1.0"

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime
from typing import Optional, Tuple, Union

import colorama
from halo import Halo
from rich.progress import Progress

from nnstabz import constants
from nnstabz import display
from nnstabz import experiments
from nnstabz import file_utilities
from nnstabz import input_validation
from nnstabz.input_validation import ConfigurationError, SweepSpec
from nnstabz.montecarlo import ExperimentConfig
from nnstabz.resources import AVAILABLE_SUBCOMMANDS, get_stream_algorithm


class SweepTruncated(RuntimeError):
    """A sweep stopped early; the finished rows and a truncation marker were written."""

    def __init__(self, cause: BaseException, exit_code: int, run_dir: str):
        self.cause = cause
        self.exit_code = exit_code
        self.run_dir = run_dir
        super().__init__(f'sweep truncated: {cause}')


def with_seed(configuration: Union[ExperimentConfig, SweepSpec], seed: Optional[int]):
    """Returns the configuration with the seed overridden, if one is given."""
    if seed is None:
        return configuration
    if isinstance(configuration, SweepSpec):
        return replace(configuration, base=replace(configuration.base, seed=seed))
    return replace(configuration, seed=seed)


def run(subcommand: str, configuration: Union[ExperimentConfig, SweepSpec], output_directory: str,
        output_format: str = 'csv', workers: int = 1, trial_records: bool = False,
        show_progress: bool = False) -> Tuple[int, str]:
    """
    Execute one NNSTABZ subcommand and write its artifacts.

    This function carries out the following steps:
    1. Computes the config digest and creates the run folder.
    2. Runs the subcommand workflow.
    3. Writes the result rows (and per-query / per-trial tables) in the requested format.
    4. Writes the run manifest every output file refers to.

    :param subcommand: One of ``bounds``, ``estimate``, ``stable-region``, ``sweep`` or ``check``.
    :type subcommand: str
    :param configuration: The parsed configuration.
    :type configuration: Union[ExperimentConfig, SweepSpec]
    :param output_directory: Directory the run folder is created in.
    :type output_directory: str
    :param output_format: One of ``csv``, ``json`` or ``plot-data``.
    :type output_format: str
    :param workers: Number of worker processes.
    :type workers: int
    :param trial_records: Whether ``estimate`` also writes the per-trial records.
    :type trial_records: bool
    :param show_progress: Whether to show a progress bar for sweeps.
    :type show_progress: bool
    :return: The exit code and the run folder.
    :rtype: Tuple[int, str]

    :Example:

    >>> run('bounds', config, '/path/to/output')

    """
    digest = input_validation.config_digest(configuration)
    config = configuration.base if isinstance(configuration, SweepSpec) else configuration
    manifest = file_utilities.RunManifest(config_digest=digest, seed=config.seed,
                                          stream_algorithm=get_stream_algorithm(), version=constants.VERSION,
                                          subcommand=subcommand, started=datetime.now().isoformat())
    run_dir, results_dir, manifest_dir, trials_dir = file_utilities.run_folder_structure(output_directory,
                                                                                        subcommand)
    logging.info(f' Run folder: {run_dir} | config digest: {digest}')

    if subcommand == 'sweep' and show_progress and isinstance(configuration, SweepSpec):
        with Progress() as progress:
            task = progress.add_task(f"[cyan] Sweeping {configuration.axis}...", total=len(configuration.values))
            result = experiments.run_workflow(subcommand, configuration, workers, manifest.file_name, trial_records,
                                              on_point=lambda index, value: progress.update(task, advance=1))
    else:
        result = experiments.run_workflow(subcommand, configuration, workers, manifest.file_name, trial_records)

    stem = f'{subcommand}-{digest[:12]}'
    manifest.files.append(os.path.basename(
        file_utilities.emit_results(result.rows, output_format, results_dir, stem, result.columns)))
    for name, (rows, columns) in result.tables.items():
        destination = trials_dir if name == 'trials' else results_dir
        manifest.files.append(os.path.basename(
            file_utilities.emit_results(rows, 'csv', destination, f'{name}-{digest[:12]}', columns)))

    manifest.finished = datetime.now().isoformat()
    manifest.timings = result.timings
    manifest.exit_code = result.exit_code
    file_utilities.write_manifest(manifest, manifest_dir)

    if result.error is not None:
        raise SweepTruncated(result.error, result.exit_code, run_dir)
    if subcommand == 'check':
        report_checks(result.rows)
    return result.exit_code, run_dir


def report_checks(rows: list) -> None:
    """Prints one line per check."""
    for row in rows:
        colour = {'passed': constants.ANSI_GREEN, 'failed': constants.ANSI_RED}.get(row['status'],
                                                                                    constants.ANSI_ORANGE)
        print(f"{colour} [{row['status'].upper():^7}] {row['check']}: {row['detail']}{constants.ANSI_RESET}")


def emit_error(error: BaseException, exit_code: int) -> int:
    """Prints the machine-readable error object to stderr and returns the exit code."""
    logging.error(f' {type(error).__name__}: {error}')
    input_validation.print_error(str(error))
    print(json.dumps({'error': type(error).__name__, 'message': str(error), 'exit_code': exit_code}),
          file=sys.stderr)
    return exit_code


# Main function for the module
def main(argv=None):
    colorama.init()

    # Argument parser
    parser = argparse.ArgumentParser(
        description=display.get_usage_message(),
        formatter_class=argparse.RawTextHelpFormatter,  # To retain the custom formatting
        add_help=False  # We'll add our own help option later
    )

    parser.add_argument(
        "subcommand",
        type=str,
        choices=AVAILABLE_SUBCOMMANDS,
        metavar="<SUBCOMMAND>",
        help="Choose the subcommand from the following:\n" + "\n".join(AVAILABLE_SUBCOMMANDS)
    )

    parser.add_argument(
        "-c", "--config",
        type=str,
        required=True,
        metavar="<CONFIG.json>",
        help="Specify the JSON config file of the experiment."
    )

    parser.add_argument(
        "-o", "--out",
        type=str,
        default=os.getcwd(),
        metavar="<OUT_DIR>",
        help="Directory the run folder is created in (default: current directory)."
    )

    parser.add_argument(
        "-f", "--format",
        type=str,
        choices=constants.OUTPUT_FORMATS,
        default="csv",
        metavar="<FORMAT>",
        help="Output format: " + ", ".join(constants.OUTPUT_FORMATS)
    )

    parser.add_argument(
        "-s", "--seed",
        type=int,
        default=None,
        metavar="<SEED>",
        help="Override the seed of the config (unsigned 64-bit)."
    )

    parser.add_argument(
        "-w", "--workers",
        type=int,
        default=constants.get_default_workers(),
        metavar="<WORKERS>",
        help=f"Number of worker processes (default: ${constants.WORKERS_ENV_VAR} or 1)."
    )

    parser.add_argument(
        "--trial-records",
        action="store_true",
        help="Also write the per-trial records of the instability estimator."
    )

    # Custom help option
    parser.add_argument(
        "-h", "--help",
        action="help",
        default=argparse.SUPPRESS,
        help="Show this help message and exit."
    )

    args = parser.parse_args(argv)

    logging.basicConfig(format='%(asctime)s %(levelname)-8s [%(filename)s:%(lineno)d] %(message)s',
                        level=logging.INFO,
                        filename=datetime.now().strftime(f'nnstabz-v.{constants.VERSION}.%H-%M-%d-%m-%Y.log'),
                        filemode='w')

    display.logo()

    logging.info('----------------------------------------------------------------------------------------------------')
    logging.info(f'                                    STARTING NNSTABZ-v.{constants.VERSION}                                  ')
    logging.info('----------------------------------------------------------------------------------------------------')

    # ----------------------------------
    # INPUT VALIDATION AND PREPARATION
    # ----------------------------------

    config_path = os.path.abspath(args.config)
    output_directory = os.path.abspath(args.out)
    logging.info(' ')
    logging.info('- Subcommand: ' + args.subcommand)
    logging.info('- Config file: ' + config_path)
    logging.info('- Output directory: ' + output_directory)
    logging.info(' ')

    if not input_validation.validate_inputs(config_path, args.subcommand, args.format):
        return emit_error(FileNotFoundError(f'cannot use config {config_path}'), constants.EXIT_VALIDATION_ERROR)

    display.section('CONFIGURATION', ':memo:')
    try:
        configuration = with_seed(input_validation.parse_config(config_path), args.seed)
    except (ConfigurationError, ValueError) as error:
        return emit_error(error, constants.EXIT_VALIDATION_ERROR)
    display.config_summary(configuration, args.workers)
    logging.info("Input validation successful.")

    # ------------------------------
    # RUN THE SUBCOMMAND
    # ------------------------------

    display.section(args.subcommand.upper(), ':crystal_ball:')
    spinner = Halo(text=f' Running {args.subcommand}...', spinner='dots')
    if args.subcommand != 'sweep':
        spinner.start()
    try:
        exit_code, run_dir = run(args.subcommand, configuration, output_directory, args.format, args.workers,
                                 args.trial_records, show_progress=args.subcommand == 'sweep')
    except SweepTruncated as error:
        spinner.stop()
        print(f'{constants.ANSI_ORANGE} Partial sweep written to {error.run_dir}{constants.ANSI_RESET}')
        return emit_error(error.cause, error.exit_code)
    except ValueError as error:
        spinner.stop()
        return emit_error(error, constants.EXIT_VALIDATION_ERROR)
    except Exception as error:
        spinner.stop()
        return emit_error(error, constants.EXIT_RUNTIME_ERROR)

    if exit_code == constants.EXIT_OK:
        spinner.succeed(f'{constants.ANSI_GREEN} {args.subcommand} done! | Results in {run_dir}{constants.ANSI_RESET}')
    else:
        spinner.fail(f'{constants.ANSI_RED} {args.subcommand} finished with exit code {exit_code} | '
                     f'Results in {run_dir}{constants.ANSI_RESET}')
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
