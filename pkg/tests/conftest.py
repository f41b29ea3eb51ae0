import warnings

import numpy as np
import pytest

from crs.space import NormKind, Space


def pytest_configure(config):
    # cvxpy reports inaccurate solves as warnings; those solves map to Unknown verdicts
    warnings.filterwarnings("ignore", message="Solution may be inaccurate")


@pytest.fixture
def l2():
    return Space(2, NormKind.L2)


@pytest.fixture
def l2_3():
    return Space(3, NormKind.L2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
