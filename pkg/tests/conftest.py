import numpy as np
import pytest

from magzak import Params, TorusGrid


@pytest.fixture
def grid2():
    return TorusGrid(2, 32, 2.0 * np.pi)


@pytest.fixture
def grid3():
    return TorusGrid(3, 16, 2.0 * np.pi)


@pytest.fixture
def sim_grid():
    """The production-scale domain used by the dynamics tests."""
    return TorusGrid(2, 64)  # P = 16 pi


@pytest.fixture
def params():
    return Params(alpha=1.0, epsilon=0.1, s=2.0)


def random_scalar(grid, rng):
    return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)


def random_vector(grid, rng):
    shape = (3,) + grid.shape
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
