import json

import numpy as np
import pytest

from nnstabz.bounds import DatasetSizeRule
from nnstabz.distributions import GaussianEllipsoid, QuerySpec, UniformCube
from nnstabz.montecarlo import ExperimentConfig

ALPHA = 0.001


def uniform_config(d=1, n=2, p=1.0, epsilon=1.0, query='corner', trials=2000, seed=7, **overrides):
    """An ExperimentConfig on the uniform cube with a constant dataset size."""
    return ExperimentConfig(spec=UniformCube(dimension=d), size_rule=DatasetSizeRule('constant', n=n), p=p,
                            epsilon=epsilon, query=QuerySpec(kind=query), trials=trials, seed=seed, **overrides)


def point_mass_config(d=3, n=5, trials=200, seed=3, **overrides):
    """Every draw lands on (1, ..., 1); the query sits at the origin."""
    spec = GaussianEllipsoid(mean=np.ones(d), stddevs=np.zeros(d))
    return ExperimentConfig(spec=spec, size_rule=DatasetSizeRule('constant', n=n), p=2.0, epsilon=0.1,
                            query=QuerySpec(kind='explicit', points=(tuple([0.0] * d),)), trials=trials, seed=seed,
                            **overrides)


@pytest.fixture
def write_config(tmp_path):
    """Writes a config record to a JSON file and returns its path."""
    def _write(record, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(record))
        return str(path)
    return _write
