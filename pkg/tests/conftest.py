import numpy as np
import pytest

from ptnet import BathSpec, SystemCoupling

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def ohmic(amplitude=0.1, cutoff=1.0, beta=1.0):
    """Ohmic bath with exponential cutoff."""
    return BathSpec.continuum(amplitude, 1.0, cutoff, "exponential", beta=beta)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def spin():
    return SystemCoupling([1.0, -1.0])
