#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Display Messages
------------------------

This module provides predefined display messages for the NNSTABZ application.

Usage:
    The functions in this module can be imported and used in other modules within
    NNSTABZ to show predefined display messages. Typical usage might include::

        from nnstabz.display import logo, section

        # Display the NNSTABZ logo:
        logo()

.. versionadded:: 0.1.0
"""

import logging
from typing import List, Union

import emoji
import pyfiglet

from nnstabz import constants
from nnstabz import distributions
from nnstabz.input_validation import SweepSpec
from nnstabz.montecarlo import ExperimentConfig
from nnstabz.resources import SUBCOMMAND_DESCRIPTIONS


def get_usage_message():
    """
    Get the usage message for NNSTABZ.

    :return: str: A message detailing the usage instructions for the NNSTABZ application.
    """
    subcommands = '\n'.join(f'      {name:<14} {text}' for name, text in SUBCOMMAND_DESCRIPTIONS.items())
    usage_message = f"""
    Usage:
      nnstabz <SUBCOMMAND> -c <CONFIG.json> [-o <OUT_DIR>] [-f csv|json|plot-data] [-s <SEED>] [-w <WORKERS>]
    Example:
      nnstabz estimate -c configs/uniform_d1.json -o /tmp/runs -w 8

    Subcommands:
{subcommands}

    Description:
      NNSTABZ (Nearest-Neighbor STABility) - closed-form bounds and reproducible Monte Carlo
      estimates of nearest-neighbor instability in high dimensions.
    """
    return usage_message


def logo():
    """
    Display the NNSTABZ logo.

    This function presents the NNSTABZ logo using the pyfiglet library and ANSI color codes.
    """
    print(' ')
    result = constants.ANSI_VIOLET + pyfiglet.figlet_format(f"NNSTABZ {constants.VERSION}",
                                                            font="slant").rstrip() + constants.ANSI_RESET
    text = constants.ANSI_VIOLET + " When is a nearest neighbor meaningful? Bounds and estimates, reproducibly." \
        + constants.ANSI_RESET
    print(result)
    print(text)
    print(' ')


def section(title: str, emoji_code: str) -> None:
    """Prints and logs a section header."""
    print('')
    print(f'{constants.ANSI_VIOLET} {emoji.emojize(emoji_code)} {title}:{constants.ANSI_RESET}')
    print('')
    logging.info(' ')
    logging.info(f' {title}:')
    logging.info(' ')


def config_summary(configuration: Union[ExperimentConfig, SweepSpec], workers: int) -> List[str]:
    """
    Display the experiment configuration.

    :param configuration: The parsed configuration.
    :type configuration: Union[ExperimentConfig, SweepSpec]
    :param workers: The number of worker processes.
    :type workers: int
    :return: The printed lines.
    :rtype: List[str]
    """
    config = configuration.base if isinstance(configuration, SweepSpec) else configuration
    size_rule = config.size_rule
    lines = [f" Law: {distributions.describe(config.spec)} | Dataset size: {size_rule.family} "
             f"(log n(d) = {size_rule.log_n(config.d):.6g})",
             f" p: {config.p} | epsilon: {config.epsilon} | zeta: {config.zeta} | level: {config.level}",
             f" Trials: {config.trials} | Queries: {config.query.kind} | Estimators: {', '.join(config.estimators)}",
             f" Seed: {config.seed} | Lane: {config.lane} | Workers: {workers}"]
    if isinstance(configuration, SweepSpec):
        lines.append(f" Sweep: {configuration.axis} over {list(configuration.values)}")
    for line in lines:
        print(line)
        logging.info(line)
    return lines
