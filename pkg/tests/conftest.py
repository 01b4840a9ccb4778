import numpy as np
import pytest

from cnls.grid import ComplexField, make_grid


@pytest.fixture(scope="session")
def grid12():
    """L = 10 pi, N = 2^12: the short-domain resolution of the source runs."""
    return make_grid(10 * np.pi, 2**12)


@pytest.fixture(scope="session")
def grid14():
    """L = 40 pi, N = 2^14: the ground-state comparison resolution."""
    return make_grid(40 * np.pi, 2**14)


@pytest.fixture()
def gauss12(grid12):
    return ComplexField(grid12, np.exp(-grid12.x**2))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
