import numpy as np
import pytest

from amalgam.grid import GridSpec


@pytest.fixture
def grid1d():
    return GridSpec(1, 16.0, 512)


@pytest.fixture
def grid2d():
    return GridSpec(2, 8.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
