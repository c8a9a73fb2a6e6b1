import numpy as np
import pytest

from sqlab.fnspace import Domain, dist_uniform


@pytest.fixture
def domain3():
    return Domain(3)


@pytest.fixture
def uniform3(domain3):
    return dist_uniform(domain3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
