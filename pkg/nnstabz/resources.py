#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Resources
-----------------

This module contains the registries that the NNSTABZ application is driven by: the available
subcommands, data-generating families, dataset-size families, query kinds, estimators and
sweep axes.

To add a new estimator, register its name in ESTIMATORS and map it to a workflow in
``nnstabz.experiments.ESTIMATOR_WORKFLOWS``.

.. versionadded:: 0.1.0
"""

import numpy as np

# List of available subcommands in the NNSTABZ application
AVAILABLE_SUBCOMMANDS = ["bounds", "estimate", "stable-region", "sweep", "check"]

SUBCOMMAND_DESCRIPTIONS = {
    "bounds": "Closed-form instability bounds (Hoeffding / Chebyshev chain, E[Z] and volume bounds).",
    "estimate": "Monte Carlo estimators named in the config.",
    "stable-region": "Fraction of uniform queries classified zeta-stable.",
    "sweep": "One result row per value of the sweep axis.",
    "check": "Bound-validity battery; exits non-zero on any violation.",
}

# Data-generating families and their parameters
DISTRIBUTION_FAMILIES = {
    "uniform-cube": [],
    "slab-mixture": ["weight", "axis"],
    "gaussian": ["spectrum", "mean"],
}

SIZE_RULE_FAMILIES = {
    "constant": ["n"],
    "polynomial": ["c", "k"],
    "exponential": ["base"],
}

DENSITY_BOUND_FAMILIES = ["witness", "constant", "polynomial", "exponential"]

QUERY_KINDS = ["center", "corner", "uniform-random", "explicit"]

SPECTRUM_KINDS = ["ones", "power"]

"""
ESTIMATORS:

- instability: fraction of fresh datasets whose query is unstable, with a Wilson interval.
- deviation: frequency of the p-power band violation for single draws (Monte Carlo oracle of the tail bounds).
- expected-z: mean of Z / d^(1/p) with the query drawn from the law itself.
- relative-variance: Var[distance] / E[distance]^2 with a bootstrap interval.
- relative-contrast: median of (D_max - D_min) / D_min with an order-statistics interval.
- moments: sample mean of the p-power distance.
- fixed-dataset: diagnostic that keeps one dataset and varies the query.
"""
ESTIMATORS = ["instability", "deviation", "expected-z", "relative-variance", "relative-contrast", "moments",
              "fixed-dataset"]

DEFAULT_ESTIMATORS = ["instability"]

SWEEP_AXES = ["d", "n", "epsilon", "p", "omega", "zeta"]


def get_stream_algorithm() -> str:
    """
    Returns the identifier of the random stream algorithm recorded in every run manifest.

    :return: The stream identifier including the numpy version.
    :rtype: str
    """
    return f"numpy.random.Philox(SeedSequence(seed, spawn_key=lane))/numpy-{np.__version__}"
