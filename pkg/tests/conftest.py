import numpy as np
import pytest

from homodyne_pointer_lab.endpoint import TimeHorizon
from homodyne_pointer_lab.qubit import BlochVector


def random_bloch(rng, n, pure=False):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not pure:
        v *= rng.random(n)[:, None] ** (1.0 / 3.0)
    return [BlochVector(*row) for row in v]


def random_hermitian(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def infinite():
    return TimeHorizon.infinite()
