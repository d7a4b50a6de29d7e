import numpy as np
import pytest
from hypothesis import settings

from pufun import Box, BuildParams, build

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


def arctan_cliff(x, y):
    return np.arctan((x + y * y) / 1e-2)


def franke(x, y):
    from pufun.bench.functions import franke as f
    return f(x, y)


@pytest.fixture(scope="session")
def sq2():
    return Box.cube(2)


@pytest.fixture(scope="session")
def cliff_fun(sq2):
    return build(arctan_cliff, sq2, BuildParams())


@pytest.fixture(scope="session")
def franke_fun(sq2):
    return build(franke, sq2, BuildParams())


@pytest.fixture(scope="session")
def smooth_fun(sq2):
    """A moderately refined tree with many leaves, cheap to build."""
    return build(lambda x, y: np.arctan(20 * (x - 0.3 * y)), sq2, BuildParams(N=33, tol=1e-13))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
