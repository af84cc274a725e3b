import numpy as np
import pytest

from windfleet.pid import default_gains
from windfleet.quadrotor import default_craft


@pytest.fixture(scope="session")
def params():
    return default_craft()


@pytest.fixture(scope="session")
def gains():
    return default_gains()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
