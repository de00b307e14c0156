import numpy as np
import pytest

from expgeo import Density, RandomVariable, SampleSpace, center


def random_space(rng, n=None):
    n = n or int(rng.integers(2, 9))
    weights = rng.uniform(0.2, 2.0, n)
    return SampleSpace(weights / weights.sum())


def random_density(rng, space):
    return Density.renormalized(space, rng.uniform(0.1, 3.0, space.size))


def random_variable(rng, space, scale=1.0):
    return RandomVariable(space, scale * rng.normal(size=space.size))


def random_coordinate(rng, p, scale=1.0):
    return center(p, scale * rng.normal(size=p.space.size))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def two_point():
    """Uniform two-point space with mu = (1/2, 1/2): the worked example."""
    space = SampleSpace.uniform(2)
    return space, Density.uniform(space), RandomVariable(space, [1.0, -1.0])
