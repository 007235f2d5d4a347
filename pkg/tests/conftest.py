import numpy as np
import pytest

from schemas import Params

@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

@pytest.fixture
def params_14():
    return Params(a=14.0, b=0.4)
