import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=1234))


def random_lorentzian(rng, scale=0.2):
    """Perturbation of Minkowski that stays Lorentzian with a negative lapse."""
    a = rng.standard_normal((4, 4)) * scale
    return np.diag([-1.0, 1.0, 1.0, 1.0]) + 0.5 * (a + a.T)
