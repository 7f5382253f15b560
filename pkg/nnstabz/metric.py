#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Metric Core
-------------------

This module contains the p-norm geometry used throughout NNSTABZ: distances and their
raw p-th power sums, the contrast threshold delta(epsilon, p) and the predicates that
decide whether a set of query distances is unstable.

Every function here is pure, so they can be called from any number of workers.

.. versionadded:: 0.1.0
"""

import math
from typing import Sequence, Union

import numpy as np

ArrayLike = Union[Sequence[float], np.ndarray]


def validate_p(p: float, minimum: float = None) -> float:
    """
    Validates a p-norm exponent.

    :param p: The exponent of the p-norm.
    :type p: float
    :param minimum: Optional inclusive lower bound, e.g. 1 for operations that need a true norm.
    :type minimum: float
    :return: The exponent as a float.
    :rtype: float
    :raises ValueError: If p is not a finite positive number or falls below the minimum.
    """
    p = float(p)
    if not math.isfinite(p) or p <= 0:
        raise ValueError(f'p must be a finite positive number, got {p}')
    if minimum is not None and p < minimum:
        raise ValueError(f'p must be at least {minimum} for this operation, got {p}')
    return p


def validate_epsilon(epsilon: float) -> float:
    """Validates the relative-contrast slack epsilon (> 0)."""
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise ValueError(f'epsilon must be a finite positive number, got {epsilon}')
    return epsilon


def as_distance_set(dists: ArrayLike) -> np.ndarray:
    """
    Converts a sequence of distances into a validated one-dimensional array.

    :param dists: The distances of the dataset points to one query.
    :type dists: ArrayLike
    :return: The distances as a float array.
    :rtype: np.ndarray
    :raises ValueError: If the set is empty or holds negative or non-finite entries.
    """
    values = np.asarray(dists, dtype=float).reshape(-1)
    if values.size == 0:
        raise ValueError('distance set must not be empty')
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError('distances must be finite and non-negative')
    return values


def _as_vector_pair(x: ArrayLike, y: ArrayLike) -> tuple:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size == 0 or x.shape != y.shape:
        raise ValueError(f'dimension mismatch: {x.size} vs {y.size}')
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError('vectors must be finite')
    return x, y


def _power_terms(difference: np.ndarray, p: float) -> np.ndarray:
    return np.abs(difference) ** p


def p_power_distance(x: ArrayLike, y: ArrayLike, p: float) -> float:
    """
    Returns the raw p-th power sum sum_j |x_j - y_j|^p, without taking the root.

    The sum is accumulated with math.fsum so the result does not depend on the
    order in which coordinates are visited.
    """
    p = validate_p(p)
    x, y = _as_vector_pair(x, y)
    return math.fsum(_power_terms(x - y, p))


def p_distance(x: ArrayLike, y: ArrayLike, p: float) -> float:
    """
    Returns the p-norm distance (sum_j |x_j - y_j|^p)^(1/p).

    :param x: First point.
    :type x: ArrayLike
    :param y: Second point, same dimension as x.
    :type y: ArrayLike
    :param p: The exponent of the p-norm (> 0).
    :type p: float
    :return: The distance between x and y.
    :rtype: float

    :Example:

    >>> p_distance([0, 0], [3, 4], 2)
    5.0
    """
    return p_power_distance(x, y, p) ** (1.0 / validate_p(p))


def p_power_distances(points: np.ndarray, query: np.ndarray, p: float) -> np.ndarray:
    """
    Returns the p-th power sums of every row of points to the query.

    Each row is summed with math.fsum, so every entry is bit-equal to p_power_distance
    of that row and independent of the coordinate order.
    """
    terms = _power_terms(np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(query, dtype=float), p)
    return np.fromiter((math.fsum(row.tolist()) for row in terms), dtype=float, count=terms.shape[0])


def delta(epsilon: float, p: float) -> float:
    """
    Returns the band half-width delta(epsilon, p) = ((1+eps)^p - 1) / ((1+eps)^p + 1).

    (1+eps)^p - 1 is formed with expm1/log1p so epsilon down to 1e-6 keeps full precision.

    :param epsilon: The relative-contrast slack (> 0).
    :type epsilon: float
    :param p: The exponent of the p-norm (> 0).
    :type p: float
    :return: A value in (0, 1), strictly increasing in epsilon.
    :rtype: float
    :raises ValueError: If (1 + epsilon)^p is so large that delta rounds to 1.
    """
    epsilon = validate_epsilon(epsilon)
    p = validate_p(p)
    try:
        growth = math.expm1(p * math.log1p(epsilon))
    except OverflowError:
        growth = math.inf
    value = growth / (growth + 2.0) if math.isfinite(growth) else 1.0
    if value >= 1.0:
        raise ValueError(f'delta rounds to 1 for epsilon={epsilon}, p={p}; the band would be unbounded')
    return value


def instability_event(dists: ArrayLike, epsilon: float) -> bool:
    """True iff max(dists) <= (1 + epsilon) * min(dists)."""
    values = as_distance_set(dists)
    epsilon = validate_epsilon(epsilon)
    return bool(values.max() <= (1.0 + epsilon) * values.min())


def z_statistic(dists: ArrayLike, epsilon: float) -> float:
    """
    Returns Z = max(dists) - (1 + epsilon) * min(dists).

    Z >= 0 is read as stable. At exact equality Z = 0 while instability_event is
    also true; the two predicates share that boundary.
    """
    values = as_distance_set(dists)
    epsilon = validate_epsilon(epsilon)
    return float(values.max() - (1.0 + epsilon) * values.min())


def band_check(p_power_dists: ArrayLike, gamma: float, delta_value: float) -> bool:
    """
    Checks that every p-th power distance lies in the band |s - gamma| <= gamma * delta.

    If the band holds with delta_value = delta(epsilon, p), the rooted distances satisfy
    max <= (1 + epsilon) * min.

    :param p_power_dists: Raw p-th power distances.
    :type p_power_dists: ArrayLike
    :param gamma: The band centre (>= 0).
    :type gamma: float
    :param delta_value: The relative half-width, in [0, 1).
    :type delta_value: float
    :return: True if all entries fall inside the band.
    :rtype: bool
    """
    if gamma < 0:
        raise ValueError(f'gamma must be non-negative, got {gamma}')
    if not 0 <= delta_value < 1:
        raise ValueError(f'delta must lie in [0, 1), got {delta_value}')
    values = np.asarray(p_power_dists, dtype=float).reshape(-1)
    return bool(np.all(np.abs(values - gamma) <= gamma * delta_value))
