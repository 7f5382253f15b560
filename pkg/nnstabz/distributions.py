#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
NNSTABZ Distributions
---------------------

This module contains the data-generating laws used by NNSTABZ, together with their samplers,
exact densities, density suprema and squared L2 norms.

Three families are available:

- ``uniform-cube``: independent uniform coordinates on [0, 1]^d.
- ``slab-mixture``: with probability w the chosen axis is drawn from [0, 1/d], every other
  coordinate stays uniform. The density is (1 - w) + w * d on the slab and (1 - w) elsewhere,
  so its supremum grows linearly in d and the coordinates are not independent.
- ``gaussian``: mu + sum_j lambda_j * g_j * e_j, a diagonal Gaussian in the given basis with
  standard deviations lambda_j sorted in descending order.

Usage:
    Specs are immutable values. Samplers only draw from the stream handed to them, so concurrent
    sampling needs distinct streams::

        from nnstabz import distributions
        spec = distributions.SlabMixture(dimension=8, weight=0.5)
        points = distributions.sample_many(spec, stream, 100)

.. versionadded:: 0.1.0
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from nnstabz.resources import QUERY_KINDS


@dataclass(frozen=True)
class UniformCube:
    """Independent uniform coordinates on [0, 1]^d."""
    dimension: int
    family: str = field(default='uniform-cube', init=False)

    def __post_init__(self):
        _check_dimension(self.dimension)


@dataclass(frozen=True)
class SlabMixture:
    """
    Mixture of the uniform cube and a slab of width 1/d along one axis.

    Attributes:
    -----------
    dimension: int
        The dimension d.
    weight: float
        The slab weight w in [0, 1).
    axis: int
        Zero-based index of the slab axis.
    """
    dimension: int
    weight: float
    axis: int = 0
    family: str = field(default='slab-mixture', init=False)

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not 0 <= self.weight < 1:
            raise ValueError(f'slab weight must lie in [0, 1), got {self.weight}')
        if not 0 <= self.axis < self.dimension:
            raise ValueError(f'slab axis must lie in [0, {self.dimension}), got {self.axis}')


@dataclass(frozen=True)
class SpectrumRule:
    """
    Builds a standard-deviation spectrum for any dimension.

    ``ones`` gives scale * (1, ..., 1); ``power`` gives scale * j^(-exponent) for j = 1..d.
    """
    kind: str = 'ones'
    exponent: float = 0.0
    scale: float = 1.0

    def build(self, dimension: int) -> np.ndarray:
        _check_dimension(dimension)
        if self.kind == 'ones':
            return np.full(dimension, float(self.scale))
        if self.kind == 'power':
            return float(self.scale) * np.arange(1, dimension + 1, dtype=float) ** (-float(self.exponent))
        raise ValueError(f'Unknown spectrum kind: {self.kind}')


@dataclass(frozen=True, eq=False)
class GaussianEllipsoid:
    """
    Diagonal Gaussian N(mu, diag(lambda^2)).

    Attributes:
    -----------
    mean: np.ndarray
        The mean vector mu.
    stddevs: np.ndarray
        The standard deviations lambda_j, non-negative and sorted in descending order.
    spectrum_rule: SpectrumRule
        The rule the spectrum was built from, if any; needed to re-dimension the distribution.
    mean_value: float
        The scalar the mean was replicated from, if any.
    """
    mean: np.ndarray
    stddevs: np.ndarray
    spectrum_rule: Optional[SpectrumRule] = None
    mean_value: Optional[float] = None
    family: str = field(default='gaussian', init=False)

    def __post_init__(self):
        stddevs = np.array(self.stddevs, dtype=float).reshape(-1)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.size == 1 and stddevs.size > 1:
            mean = np.full(stddevs.size, mean[0])
        _check_dimension(stddevs.size)
        if mean.shape != stddevs.shape:
            raise ValueError(f'mean has dimension {mean.size} but the spectrum has {stddevs.size}')
        if not (np.all(np.isfinite(stddevs)) and np.all(np.isfinite(mean))):
            raise ValueError('gaussian parameters must be finite')
        if np.any(stddevs < 0):
            raise ValueError('standard deviations must be non-negative')
        if np.any(np.diff(stddevs) > 0):
            raise ValueError('standard deviations must be sorted in descending order')
        stddevs.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, 'stddevs', stddevs)
        object.__setattr__(self, 'mean', mean)

    @property
    def dimension(self) -> int:
        return int(self.stddevs.size)

    @property
    def is_centered(self) -> bool:
        return bool(np.all(self.mean == 0))


DistributionSpec = Union[UniformCube, SlabMixture, GaussianEllipsoid]


@dataclass(frozen=True)
class DensityBoundRule:
    """
    A closed-form majorant beta(d) of the density supremum.

    Attributes:
    -----------
    family: str
        One of ``constant`` (c), ``polynomial`` (c * d^k) or ``exponential`` (base^d).
    c: float
        The multiplicative constant.
    k: float
        The polynomial degree.
    base: float
        The exponential base.
    """
    family: str
    c: float = 1.0
    k: float = 0.0
    base: float = 1.0

    def __post_init__(self):
        if self.family not in ('constant', 'polynomial', 'exponential'):
            raise ValueError(f'Unknown density bound family: {self.family}')
        if self.c <= 0:
            raise ValueError(f'density bound constant must be positive, got {self.c}')
        if self.k < 0:
            raise ValueError(f'density bound degree must be non-negative, got {self.k}')
        if self.family == 'exponential' and self.base <= 1:
            raise ValueError(f'exponential base must exceed 1, got {self.base}')

    def log_value(self, dimension: int) -> float:
        if self.family == 'constant':
            return math.log(self.c)
        if self.family == 'polynomial':
            return math.log(self.c) + self.k * math.log(dimension)
        return dimension * math.log(self.base)

    def evaluate(self, dimension: int) -> float:
        log_value = self.log_value(dimension)
        return math.exp(log_value) if log_value < 700 else math.inf

    @property
    def is_subexponential(self) -> bool:
        return self.family != 'exponential'

    def growth_profile(self, dimensions: Sequence[int]) -> np.ndarray:
        """Returns log(beta(d)) / d along the given dimensions."""
        return np.array([self.log_value(d) / d for d in dimensions])


@dataclass(frozen=True)
class QuerySpec:
    """
    How query points are realized.

    ``center`` and ``corner`` give one point, ``uniform-random`` gives ``count`` points and
    ``explicit`` uses the given ``points``.
    """
    kind: str = 'center'
    count: int = 1
    points: Tuple[Tuple[float, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise ValueError(f'Unknown query kind: {self.kind}')
        if self.kind == 'uniform-random' and self.count < 1:
            raise ValueError(f'uniform-random queries need count >= 1, got {self.count}')
        if self.kind == 'explicit' and len(self.points) == 0:
            raise ValueError('explicit queries need at least one point')


def _check_dimension(dimension: int) -> None:
    if int(dimension) != dimension or dimension < 1:
        raise ValueError(f'dimension must be a positive integer, got {dimension}')


def is_cube_supported(spec: DistributionSpec) -> bool:
    """Returns True if support(spec) is exactly [0, 1]^d."""
    return isinstance(spec, (UniformCube, SlabMixture))


def make_gaussian(dimension: int, spectrum: Union[str, SpectrumRule, Sequence[float]] = 'ones',
                  mean: Union[float, Sequence[float]] = 0.0) -> GaussianEllipsoid:
    """
    Builds a Gaussian spec from a spectrum rule (or explicit spectrum) and a mean.

    :param dimension: The dimension d; ignored in favour of the spectrum length when explicit.
    :type dimension: int
    :param spectrum: ``'ones'``, a SpectrumRule or an explicit standard-deviation list.
    :param mean: A scalar replicated along every axis, or an explicit mean vector.
    :return: The Gaussian spec.
    :rtype: GaussianEllipsoid
    """
    if isinstance(spectrum, str):
        spectrum = SpectrumRule(kind=spectrum)
    if isinstance(spectrum, SpectrumRule):
        stddevs = spectrum.build(dimension)
        rule = spectrum
    else:
        stddevs = np.asarray(spectrum, dtype=float)
        rule = None
    if np.ndim(mean) == 0:
        return GaussianEllipsoid(mean=np.full(stddevs.size, float(mean)), stddevs=stddevs, spectrum_rule=rule,
                                 mean_value=float(mean))
    return GaussianEllipsoid(mean=np.asarray(mean, dtype=float), stddevs=stddevs, spectrum_rule=rule)


def resize(spec: DistributionSpec, dimension: int) -> DistributionSpec:
    """
    Returns the same law in another dimension.

    :raises ValueError: For Gaussian specs with an explicit spectrum or an explicit mean vector.
    """
    if isinstance(spec, UniformCube):
        return UniformCube(dimension=dimension)
    if isinstance(spec, SlabMixture):
        return SlabMixture(dimension=dimension, weight=spec.weight, axis=spec.axis)
    if spec.spectrum_rule is None or spec.mean_value is None:
        raise ValueError('a gaussian with an explicit spectrum or mean cannot be re-dimensioned')
    return make_gaussian(dimension, spec.spectrum_rule, spec.mean_value)


def sample_many(spec: DistributionSpec, stream: np.random.Generator, count: int) -> np.ndarray:
    """
    Draws ``count`` independent points from the distribution.

    Every point consumes the same fixed block of the stream (d doubles for the cube, d + 1
    for the slab mixture, d normals for the Gaussian), so the first m rows of a draw of size
    n > m equal a draw of size m.

    :param spec: The data-generating law.
    :type spec: DistributionSpec
    :param stream: The random stream to draw from.
    :type stream: np.random.Generator
    :param count: Number of points.
    :type count: int
    :return: Array of shape (count, d).
    :rtype: np.ndarray
    """
    d = spec.dimension
    if isinstance(spec, UniformCube):
        return stream.random((count, d))
    if isinstance(spec, SlabMixture):
        block = stream.random((count, d + 1))
        points = block[:, 1:]
        in_slab = block[:, 0] < spec.weight
        points[in_slab, spec.axis] /= d
        return points
    if isinstance(spec, GaussianEllipsoid):
        return spec.mean + spec.stddevs * stream.standard_normal((count, d))
    raise ValueError(f'Unknown distribution spec: {spec!r}')


def sample(spec: DistributionSpec, stream: np.random.Generator) -> np.ndarray:
    """Draws one point from the distribution."""
    return sample_many(spec, stream, 1)[0]


def density(spec: DistributionSpec, point: np.ndarray) -> Union[float, np.ndarray]:
    """
    Returns the exact density at a point, or at every row of an array of points.

    :param spec: The data-generating law.
    :type spec: DistributionSpec
    :param point: A point of dimension d, or an array of shape (m, d).
    :type point: np.ndarray
    :return: The density value(s); zero outside [0, 1]^d for cube-supported laws.
    :raises ValueError: On a dimension mismatch, or for a Gaussian with a zero standard deviation.
    """
    values = np.asarray(point, dtype=float)
    if values.shape[-1] != spec.dimension:
        raise ValueError(f'point has dimension {values.shape[-1]}, expected {spec.dimension}')

    if isinstance(spec, GaussianEllipsoid):
        if np.any(spec.stddevs == 0):
            raise ValueError('gaussian density is undefined with a zero standard deviation')
        result = np.exp(stats.norm.logpdf(values, loc=spec.mean, scale=spec.stddevs).sum(axis=-1))
    else:
        inside = np.all((values >= 0) & (values <= 1), axis=-1)
        if isinstance(spec, UniformCube):
            result = np.where(inside, 1.0, 0.0)
        else:
            d = spec.dimension
            in_slab = values[..., spec.axis] <= 1.0 / d
            level = np.where(in_slab, (1 - spec.weight) + spec.weight * d, 1 - spec.weight)
            result = np.where(inside, level, 0.0)

    if values.ndim == 1:
        return float(result)
    return result


def _require_cube(spec: DistributionSpec, operation: str) -> None:
    if not is_cube_supported(spec):
        logging.error(f'{operation} requested for a {spec.family} spec; only cube-supported laws qualify.')
        raise ValueError(f'{operation} is only defined for cube-supported laws, got {spec.family}')


def density_sup(spec: DistributionSpec) -> float:
    """
    Returns the exact density supremum, the beta(d) witness of a cube-supported law.

    :raises ValueError: For Gaussian specs, whose support is not the cube.
    """
    _require_cube(spec, 'density_sup')
    if isinstance(spec, UniformCube):
        return 1.0
    return (1 - spec.weight) + spec.weight * spec.dimension


def l2_density_norm_squared(spec: DistributionSpec) -> float:
    """Returns the integral of the squared density over [0, 1]^d."""
    _require_cube(spec, 'l2_density_norm_squared')
    if isinstance(spec, UniformCube):
        return 1.0
    d = spec.dimension
    w = spec.weight
    return (1 - 1 / d) * (1 - w) ** 2 + (1 / d) * ((1 - w) + w * d) ** 2


def gaussian_squared_norm_moments(spectrum: Sequence[float]) -> Tuple[float, float]:
    """
    Returns the mean and variance of ||Y||_2^2 for a centered diagonal Gaussian.

    :param spectrum: The standard deviations lambda_j.
    :return: (sum lambda_j^2, 2 * sum lambda_j^4).
    :rtype: Tuple[float, float]
    """
    squares = np.asarray(spectrum, dtype=float) ** 2
    return math.fsum(squares), 2.0 * math.fsum(squares ** 2)


def in_support(spec: DistributionSpec, point: np.ndarray) -> bool:
    """Returns True if the point is a valid query for the distribution."""
    values = np.asarray(point, dtype=float).reshape(-1)
    if values.size != spec.dimension or not np.all(np.isfinite(values)):
        return False
    if is_cube_supported(spec):
        return bool(np.all((values >= 0) & (values <= 1)))
    return True


def realize_queries(query: QuerySpec, spec: DistributionSpec, stream: np.random.Generator) -> List[np.ndarray]:
    """
    Turns a query spec into concrete query points.

    :param query: The query spec.
    :type query: QuerySpec
    :param spec: The data-generating law the queries are posed against.
    :type spec: DistributionSpec
    :param stream: Stream used by ``uniform-random`` queries.
    :type stream: np.random.Generator
    :return: The list of query points.
    :rtype: List[np.ndarray]
    :raises ValueError: If an explicit point lies outside the support of the distribution.
    """
    d = spec.dimension
    if query.kind == 'center':
        points = [np.array(spec.mean) if isinstance(spec, GaussianEllipsoid) else np.full(d, 0.5)]
    elif query.kind == 'corner':
        points = [np.zeros(d)]
    elif query.kind == 'uniform-random':
        if is_cube_supported(spec):
            points = list(stream.random((query.count, d)))
        else:
            points = list(sample_many(spec, stream, query.count))
    else:
        points = [np.asarray(point, dtype=float) for point in query.points]

    for index, point in enumerate(points):
        if not in_support(spec, point):
            raise ValueError(f'query point {index} is not in the support of the {spec.family} law')
    return points


def describe(spec: DistributionSpec) -> str:
    """Returns a short human-readable description of the distribution."""
    if isinstance(spec, SlabMixture):
        return f'{spec.family}(d={spec.dimension}, w={spec.weight}, axis={spec.axis})'
    if isinstance(spec, GaussianEllipsoid):
        return f'{spec.family}(d={spec.dimension}, sum lambda^2={math.fsum(spec.stddevs ** 2):.6g})'
    return f'{spec.family}(d={spec.dimension})'

