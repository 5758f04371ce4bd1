import numpy as np
import pytest

from chanwit.core import PureState

BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)
SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)
# sqrt(0.8)|00> + sqrt(0.2)|11>
PARTIAL = np.array([np.sqrt(0.8), 0, 0, np.sqrt(0.2)])


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_psd(rng, d):
    g = random_complex(rng, d, d)
    return g @ g.conj().T


def random_hermitian(rng, n):
    g = random_complex(rng, n, n)
    return (g + g.conj().T) / 2


def random_pure(rng, d):
    v = random_complex(rng, d * d)
    return PureState(d, v / np.linalg.norm(v))


def random_sigma(rng, d):
    s = np.abs(rng.standard_normal(d))
    return np.sort(s / np.linalg.norm(s))[::-1]


def state_with_sigma(sigma):
    d = len(sigma)
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = sigma
    return PureState(d, v)
