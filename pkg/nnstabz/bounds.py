#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Bounds
--------------

This module contains every closed-form quantity of NNSTABZ:

- the Hoeffding chain: the band-violation tail bound for cube-supported laws and the instability
  lower bound (1 - tail)^n(d);
- the Chebyshev chain for centered diagonal Gaussians with p = 2;
- unit p-ball volumes, the E[Z] / d^(1/p) lower bound, the stable-volume lower bound and the
  largeness ratio that decide the exponential dataset-size regime.

All n-dependent arithmetic goes through log n(d), so exponential size rules at d = 1000 never
materialize n as an integer. Probabilities are clamped to [0, 1]; a clamp is reported as a flag,
never as an error.

.. versionadded:: 0.1.0
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from nnstabz import constants
from nnstabz import distributions
from nnstabz.metric import delta, validate_epsilon, validate_p


@dataclass(frozen=True)
class DatasetSizeRule:
    """
    The dataset size n(d).

    Attributes:
    -----------
    family: str
        ``constant`` (n), ``polynomial`` (ceil(c * d^k)) or ``exponential`` (ceil(base^d)).
    """
    family: str
    n: int = 1
    c: float = 1.0
    k: float = 0.0
    base: float = 2.0

    def __post_init__(self):
        if self.family == 'constant':
            if int(self.n) != self.n or self.n < 1:
                raise ValueError(f'constant dataset size must be a positive integer, got {self.n}')
        elif self.family == 'polynomial':
            if self.c <= 0 or self.k < 0:
                raise ValueError(f'polynomial dataset size needs c > 0 and k >= 0, got c={self.c}, k={self.k}')
        elif self.family == 'exponential':
            if self.base <= 1:
                raise ValueError(f'exponential dataset size needs base > 1, got {self.base}')
        else:
            raise ValueError(f'Unknown dataset size family: {self.family}')

    def log_n(self, dimension: int) -> float:
        """Returns log n(d) without materializing n(d)."""
        if self.family == 'constant':
            return math.log(self.n)
        if self.family == 'polynomial':
            return math.log(self.realize(dimension))
        n_value = self.base ** dimension if dimension * math.log(self.base) < 700 else math.inf
        if math.isfinite(n_value):
            return math.log(math.ceil(n_value))
        return dimension * math.log(self.base)

    def realize(self, dimension: int) -> int:
        """
        Returns n(d) as an integer.

        :raises OverflowError: If n(d) is too large to be represented.
        """
        if self.family == 'constant':
            return int(self.n)
        if self.family == 'polynomial':
            return max(1, math.ceil(self.c * dimension ** self.k))
        if dimension * math.log(self.base) >= 700:
            raise OverflowError(f'n(d) = {self.base}^{dimension} cannot be materialized')
        return math.ceil(self.base ** dimension)


@dataclass(frozen=True)
class BoundReport:
    """Theoretical quantities for one configuration."""
    law: str
    d: int
    log_n: float
    n: Optional[int]
    p: float
    epsilon: float
    zeta: float
    beta: Optional[float]
    omega: Optional[float]
    delta_value: float
    gamma: float
    deviation_bound: float
    instability_lower_bound: float
    deviation_clamped: bool
    instability_clamped: bool
    ez_ratio_bound: Optional[float] = None
    stable_volume_bound: Optional[float] = None
    stable_volume_clamped: Optional[bool] = None
    log_largeness_ratio: Optional[float] = None
    ez_ratio_asymptotic: Optional[bool] = None

    def to_row(self) -> dict:
        """Returns the report keyed by the result column names."""
        row = asdict(self)
        row['delta'] = row.pop('delta_value')
        row.pop('law')
        return row


def gamma_uniform(query: Sequence[float], p: float) -> float:
    """
    Returns gamma = sum_j E|U_j - q_j|^p for independent uniforms U_j on [0, 1].

    :param query: The query point in [0, 1]^d.
    :type query: Sequence[float]
    :param p: The exponent of the p-norm.
    :type p: float
    :return: sum_j [q_j^(p+1) + (1 - q_j)^(p+1)] / (p + 1).
    :rtype: float
    :raises ValueError: If a coordinate lies outside [0, 1].
    """
    p = validate_p(p)
    q = np.asarray(query, dtype=float).reshape(-1)
    if q.size == 0 or np.any(q < 0) or np.any(q > 1) or not np.all(np.isfinite(q)):
        raise ValueError('query coordinates must lie in [0, 1]')
    return math.fsum((q ** (p + 1) + (1 - q) ** (p + 1)) / (p + 1))


def _log_hoeffding_tail(d: int, p: float, epsilon: float, beta_value: float) -> float:
    delta_value = delta(epsilon, p)
    exponent = 2.0 * delta_value ** 2 * d / ((p + 1) ** 2 * 4.0 ** p)
    return math.log(2.0) + math.log(beta_value) - exponent


def hoeffding_deviation_bound(d: int, p: float, epsilon: float, beta_value: float) -> float:
    """
    Returns min(1, 2 * beta * exp(-2 * delta^2 * d / ((p + 1)^2 * 4^p))).

    This bounds Pr[| ||Y - q||_p^p - gamma | > gamma * delta(epsilon, p)] for any law on [0, 1]^d
    whose density is at most beta, and any query in the cube.
    """
    if d < 1:
        raise ValueError(f'd must be at least 1, got {d}')
    if beta_value <= 0:
        raise ValueError(f'beta must be positive, got {beta_value}')
    p = validate_p(p)
    epsilon = validate_epsilon(epsilon)
    return math.exp(min(0.0, _log_hoeffding_tail(d, p, epsilon, beta_value)))


def _instability_from_tail(tail: float, log_n: float) -> float:
    """Returns max(0, 1 - tail)^n, evaluated as exp(-exp(log n + log(-log1p(-tail))))."""
    if tail >= 1:
        return 0.0
    if tail <= 0:
        return 1.0
    log_exponent = log_n + math.log(-math.log1p(-tail))
    if log_exponent > 700:
        return 0.0
    return math.exp(-math.exp(log_exponent))


def instability_probability_lower_bound(d: int, size_rule: DatasetSizeRule, p: float, epsilon: float,
                                        beta_value: float) -> float:
    """
    Returns the lower bound (1 - hoeffding tail)^n(d) on the instability probability.

    :param d: The dimension.
    :type d: int
    :param size_rule: The dataset size rule n(d).
    :type size_rule: DatasetSizeRule
    :param p: The exponent of the p-norm.
    :type p: float
    :param epsilon: The relative-contrast slack.
    :type epsilon: float
    :param beta_value: The density bound beta(d).
    :type beta_value: float
    :return: A probability in [0, 1].
    :rtype: float
    """
    tail = hoeffding_deviation_bound(d, p, epsilon, beta_value)
    return _instability_from_tail(tail, size_rule.log_n(d))


def _spectrum_sums(spectrum: Sequence[float]) -> Tuple[float, float]:
    squares = np.asarray(spectrum, dtype=float) ** 2
    if squares.size == 0 or not np.any(squares > 0):
        raise ValueError('the spectrum needs at least one positive standard deviation')
    return math.fsum(squares), math.fsum(squares ** 2)


def chebyshev_gaussian_deviation_bound(spectrum: Sequence[float], epsilon: float) -> float:
    """
    Returns min(1, 2 * sum lambda^4 / (delta(epsilon, 2)^2 * (sum lambda^2)^2)).

    This is Chebyshev's inequality Var / t^2 for ||Y||_2^2 with Var = 2 sum lambda^4 and
    t = delta * sum lambda^2, for a centered diagonal Gaussian and the query at the origin.
    """
    sum_squares, sum_fourth = _spectrum_sums(spectrum)
    delta_value = delta(epsilon, 2.0)
    return min(1.0, 2.0 * sum_fourth / (delta_value ** 2 * sum_squares ** 2))


def gaussian_instability_lower_bound(spectrum: Sequence[float], size_rule: DatasetSizeRule, epsilon: float,
                                     d: int) -> float:
    """Returns (1 - chebyshev tail)^n(d) for a centered Gaussian, p = 2 and the query at the origin."""
    tail = chebyshev_gaussian_deviation_bound(spectrum, epsilon)
    return _instability_from_tail(tail, size_rule.log_n(d))


def log_unit_ball_volume(d: int, p: float) -> float:
    """
    Returns log V_{d,p} = d * log(2 * Gamma(1 + 1/p)) - log Gamma(1 + d/p).

    :Example:

    >>> round(math.exp(log_unit_ball_volume(2, 2)), 12) == round(math.pi, 12)
    True
    """
    if d < 1:
        raise ValueError(f'd must be at least 1, got {d}')
    p = validate_p(p)
    return d * (math.log(2.0) + float(gammaln(1.0 + 1.0 / p))) - float(gammaln(1.0 + d / p))


def ball_volume_limit_check(d: int, p: float) -> Tuple[float, float]:
    """
    Returns (d^(1/p) * V_{d,p}^(1/d), 2 * (e * p)^(1/p)).

    The first value stays below the second for large d.
    """
    p = validate_p(p, minimum=1.0)
    value = math.exp(math.log(d) / p + log_unit_ball_volume(d, p) / d)
    limit = 2.0 * (math.e * p) ** (1.0 / p)
    return value, limit


def stirling_log_gamma(z: float) -> float:
    """Stirling's approximation log Gamma(z) ~ -z + (z - 1/2) log z + log(2 pi) / 2."""
    return -z + (z - 0.5) * math.log(z) + 0.5 * math.log(2.0 * math.pi)


def _log_gamma_function_ratio(log_n: float, d: int) -> float:
    a = 1.0 / d
    if log_n <= math.log(constants.GAMMA_RATIO_EXACT_LIMIT):
        n = math.exp(log_n)
        return float(gammaln(n + a) + gammaln(n + 1) - gammaln(n) - gammaln(n + 1 + a))
    # log Gamma(z + a) - log Gamma(z) ~ a log z + a (a - 1) / (2 z)
    inverse_n = math.exp(-log_n)
    log_n_plus_one = log_n + math.log1p(inverse_n)
    inverse_n_plus_one = inverse_n / (1.0 + inverse_n)
    return a * (log_n - log_n_plus_one) + 0.5 * a * (a - 1.0) * (inverse_n - inverse_n_plus_one)


def gamma_function_ratio(log_n: float, d: int) -> float:
    """
    Returns Gamma(n + 1/d) Gamma(n + 1) / (Gamma(n) Gamma(n + 1 + 1/d)) from log n.

    Uses log-gamma differences up to n = 1e6 and the asymptotic expansion beyond, where the
    differences would cancel catastrophically.
    """
    if d < 1:
        raise ValueError(f'd must be at least 1, got {d}')
    if log_n < 0:
        raise ValueError(f'log n must be non-negative, got {log_n}')
    return math.exp(_log_gamma_function_ratio(log_n, d))


def ez_ratio_lower_bound(d: int, p: float, epsilon: float, log_n: float, l2_norm_squared: float) -> float:
    """
    Returns the asymptotic lower bound on E[Z] / d^(1/p), Z = D_max - (1 + epsilon) D_min.

    The bound is term1 - term2 with

    - term1 = Gamma-ratio / (d^(1/p) * 3^(1/2) * 2^(1/d) * e^(1/(2d)) * ||f||_2^(2/d) * V_{d,p}^(1/d))
    - term2 = 2 (1 + epsilon) / (d^(1/p) * (n + 1)^(1/d) * V_{d,p}^(1/d))

    and the lower-order o(.) term dropped. The result may be negative, in which case the bound
    is vacuous and is reported as-is.

    :param d: The dimension.
    :type d: int
    :param p: The exponent of the p-norm (>= 1).
    :type p: float
    :param epsilon: The relative-contrast slack.
    :type epsilon: float
    :param log_n: log n(d).
    :type log_n: float
    :param l2_norm_squared: The integral of the squared density.
    :type l2_norm_squared: float
    :return: The lower bound.
    :rtype: float
    """
    p = validate_p(p, minimum=1.0)
    epsilon = validate_epsilon(epsilon)
    if l2_norm_squared <= 0:
        raise ValueError(f'the squared L2 norm must be positive, got {l2_norm_squared}')
    log_scale = math.log(d) / p + log_unit_ball_volume(d, p) / d
    log_term1 = (_log_gamma_function_ratio(log_n, d) - log_scale - 0.5 * math.log(3.0) - math.log(2.0) / d
                 - 0.5 / d - math.log(l2_norm_squared) / d)
    log_root_n_plus_one = (log_n + math.log1p(math.exp(-log_n))) / d
    term2 = 2.0 * (1.0 + epsilon) * math.exp(-log_scale - log_root_n_plus_one)
    return math.exp(log_term1) - term2


def stable_volume_lower_bound(ez_ratio: float, zeta: float, beta_value: float) -> float:
    """
    Returns the lower bound [1 / (zeta * beta)] * [E[Z] / d^(1/p) + zeta - 1] on the volume of the
    zeta-stable query region, clamped below at zero.

    :raises ValueError: If zeta lies outside (0.99, 1) or beta is not positive.
    """
    if not constants.ZETA_LOWER < zeta < 1:
        raise ValueError(f'zeta must lie in ({constants.ZETA_LOWER}, 1), got {zeta}')
    if beta_value <= 0:
        raise ValueError(f'beta must be positive, got {beta_value}')
    return max(0.0, (ez_ratio + zeta - 1.0) / (zeta * beta_value))


def largeness_ratio(omega: float, d: int, volume_lower: float) -> float:
    """
    Returns log(omega^d / volume_lower), which must tend to -inf along d for a large query region.

    :return: The log-ratio; -inf when omega is zero.
    :rtype: float
    """
    if not 0 <= omega < 1:
        raise ValueError(f'omega must lie in [0, 1), got {omega}')
    if volume_lower <= 0:
        raise ValueError(f'the volume lower bound must be positive, got {volume_lower}')
    if omega == 0:
        return -math.inf
    return d * math.log(omega) - math.log(volume_lower)


def build_bound_report(config, query: np.ndarray) -> BoundReport:
    """
    Assembles every theoretical quantity for one experiment configuration and query.

    Cube-supported laws use the Hoeffding chain and, for p >= 1, the E[Z] and stable-volume
    bounds. Gaussian laws use the Chebyshev chain, which needs a centered law, p = 2 and the
    query at the origin.

    :param config: The experiment configuration (``nnstabz.montecarlo.ExperimentConfig``).
    :param query: The query point the report is computed for.
    :type query: np.ndarray
    :return: The report.
    :rtype: BoundReport
    :raises ValueError: If the configuration is outside the setting of both chains.
    """
    spec = config.spec
    d = spec.dimension
    log_n = config.size_rule.log_n(d)
    n_value = config.size_rule.realize(d) if log_n < 50 else None
    delta_value = delta(config.epsilon, config.p)

    if distributions.is_cube_supported(spec):
        beta_value = config.beta_value()
        raw_log_tail = _log_hoeffding_tail(d, config.p, config.epsilon, beta_value)
        deviation_bound = hoeffding_deviation_bound(d, config.p, config.epsilon, beta_value)
        instability = instability_probability_lower_bound(d, config.size_rule, config.p, config.epsilon,
                                                          beta_value)
        ez_bound = None
        volume_bound = None
        volume_clamped = None
        log_ratio = None
        if config.p >= 1:
            ez_bound = ez_ratio_lower_bound(d, config.p, config.epsilon, log_n,
                                            distributions.l2_density_norm_squared(spec))
            raw_volume = (ez_bound + config.zeta - 1.0) / (config.zeta * beta_value)
            volume_bound = stable_volume_lower_bound(ez_bound, config.zeta, beta_value)
            volume_clamped = raw_volume < 0
            if config.omega is not None and volume_bound > 0:
                log_ratio = largeness_ratio(config.omega, d, volume_bound)
        report = BoundReport(law='hoeffding', d=d, log_n=log_n, n=n_value, p=config.p, epsilon=config.epsilon,
                             zeta=config.zeta, beta=beta_value, omega=config.omega, delta_value=delta_value,
                             gamma=gamma_uniform(query, config.p), deviation_bound=deviation_bound,
                             instability_lower_bound=instability, deviation_clamped=raw_log_tail >= 0,
                             instability_clamped=deviation_bound >= 1, ez_ratio_bound=ez_bound,
                             stable_volume_bound=volume_bound, stable_volume_clamped=volume_clamped,
                             log_largeness_ratio=log_ratio, ez_ratio_asymptotic=True if ez_bound is not None else None)
    else:
        if config.p != 2 or not spec.is_centered or np.any(np.asarray(query) != 0):
            raise ValueError('gaussian bounds need a centered law, p = 2 and the query at the origin')
        sum_squares, sum_fourth = _spectrum_sums(spec.stddevs)
        raw_tail = 2.0 * sum_fourth / (delta_value ** 2 * sum_squares ** 2)
        deviation_bound = chebyshev_gaussian_deviation_bound(spec.stddevs, config.epsilon)
        report = BoundReport(law='chebyshev', d=d, log_n=log_n, n=n_value, p=config.p, epsilon=config.epsilon,
                             zeta=config.zeta, beta=None, omega=config.omega, delta_value=delta_value,
                             gamma=sum_squares, deviation_bound=deviation_bound,
                             instability_lower_bound=gaussian_instability_lower_bound(
                                 spec.stddevs, config.size_rule, config.epsilon, d),
                             deviation_clamped=raw_tail >= 1, instability_clamped=deviation_bound >= 1)

    if report.deviation_clamped:
        logging.warning(f' Deviation bound clamped to 1 at d={d}, p={config.p}, epsilon={config.epsilon}; '
                        f'the bound is vacuous here.')
    logging.info(f' Bound report ({report.law}): d={d}, log n={log_n:.6g}, delta={delta_value:.6g}, '
                 f'tail={report.deviation_bound:.6g}, instability >= {report.instability_lower_bound:.6g}')
    return report
