import numpy as np
import pytest

from wenods.euler import GasModel, primitive_to_conserved


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_primitives(rng, shape):
    """Physical primitive states away from the vacuum."""
    w = np.empty(shape + (4,))
    w[..., 0] = rng.uniform(0.1, 3.0, shape)
    w[..., 1] = rng.uniform(-2.0, 2.0, shape)
    w[..., 2] = rng.uniform(-2.0, 2.0, shape)
    w[..., 3] = rng.uniform(0.05, 4.0, shape)
    return w


def random_conserved(rng, shape, gamma=1.4):
    return primitive_to_conserved(random_primitives(rng, shape), GasModel(gamma))
