import numpy as np
import pytest

from spherepoly.rng import stream
from spherepoly.sampling import uniform_points


@pytest.fixture
def rng():
    return stream(12345, "tests")


def sphere_points(seed, m, n):
    return uniform_points(stream(seed, "fixture"), m, n)


@pytest.fixture
def square():
    from spherepoly import convex_hull

    return convex_hull(np.array([[1.0, 0], [0, 1.0], [-1.0, 0], [0, -1.0]]))
