import numpy as np
import pytest
from scipy.linalg import sqrtm

from steercert.povm import MeasurementSet, Povm


def random_povm(dim, n, rng):
    """n random full-rank elements normalized by S^(-1/2) . S^(-1/2)."""
    g = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    a = g @ np.conj(np.transpose(g, (0, 2, 1)))
    s_inv = np.linalg.inv(sqrtm(a.sum(axis=0)))
    els = [s_inv @ e @ s_inv.conj().T for e in a]
    return Povm(tuple((e + e.conj().T) / 2 for e in els))


def random_measurements(dim, rng):
    return MeasurementSet(tuple(random_povm(dim, 3, rng) for _ in range(3)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
