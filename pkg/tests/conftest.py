import numpy as np
import pytest
from hypothesis import strategies as st

from kdvbalance.dynamics import Params
from kdvbalance.grid import Field, make_grid


@pytest.fixture(scope="session")
def grid_2pi():
    return make_grid(64, 2 * np.pi)


@pytest.fixture(scope="session")
def grid_100():
    return make_grid(1024, 100.0)


@pytest.fixture(scope="session")
def eps01():
    return Params(0.1)


def trig_field(grid, coeffs):
    """sum_m a_m cos(k_m x) + b_m sin(k_m x) for m = 1..len(coeffs), plus a mean."""
    x = grid.x
    k = 2 * np.pi / grid.length
    vals = np.full(grid.n, coeffs[0][0])
    for m, (a, b) in enumerate(coeffs[1:], start=1):
        vals = vals + a * np.cos(m * k * x) + b * np.sin(m * k * x)
    return Field(grid, vals)


coeff = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
# band-limited: at most 6 modes on a 64-point grid, well below the n/3 cutoff
trig_coeffs = st.lists(st.tuples(coeff, coeff), min_size=1, max_size=7)
epsilons = st.floats(min_value=1e-3, max_value=0.5)
