import numpy as np
import pytest

from symphonic.geometry import Box
from symphonic.sampling import sample_box


@pytest.fixture(scope="session")
def quad_box():
    """Positive box clear of every degeneracy in the identity test maps."""
    return Box(((0.15, 0.45), (0.15, 0.45)))


@pytest.fixture(scope="session")
def quad_points(quad_box):
    return sample_box(quad_box, 50, seed=0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
