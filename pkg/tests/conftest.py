import numpy as np
import pytest

from gwcut import generate_regular, init_gaussian


@pytest.fixture(scope="session")
def small_regular():
    """A fixed 4-regular graph on 120 vertices, girth >= 5."""
    return generate_regular(120, 4, seed=2024, min_girth=5)


@pytest.fixture(scope="session")
def small_field(small_regular):
    return init_gaussian(small_regular.n, seed=31415)


def assert_partition(p, n):
    assert p.shape == (n,)
    assert np.all(np.abs(p) == 1)
