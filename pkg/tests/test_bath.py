import math

import numpy as np
import pytest
from scipy import integrate

from ptnet import (
    ArgumentError,
    BathSpec,
    NumericError,
    correlation,
    discretize_continuum,
    eta_table,
    spectral_density,
)

from conftest import ohmic

SINGLE = BathSpec.discrete([(1.0, 1.0)])


def test_single_mode_correlation():
    assert abs(correlation(SINGLE, math.pi / 2) - (-1j)) <= 1e-14
    t = np.linspace(0, 5, 11)
    assert np.max(np.abs(correlation(SINGLE, t) - np.exp(-1j * t))) <= 1e-14


@pytest.mark.parametrize(
    "bath",
    [SINGLE, ohmic(), BathSpec.continuum(0.2, 0.5, 2.0, "hard", beta=3.0), BathSpec.continuum(0.1, 2.0, 1.0)],
)
def test_zero_time_is_real(bath):
    assert abs(correlation(bath, 0.0).imag) <= 1e-12


def _quad_reference(bath, t):
    def part(f):
        val, _ = integrate.quad(f, 0.0, bath.cutoff, epsabs=1e-15, epsrel=1e-13, limit=400)
        return val

    re = part(lambda w: bath.amplitude * w**bath.exponent * math.cos(w * t))
    im = part(lambda w: bath.amplitude * w**bath.exponent * math.sin(w * t))
    return re - 1j * im


def test_continuum_against_adaptive_quadrature():
    bath = BathSpec.continuum(0.1, 1.0, 1.0, "hard")
    times = np.linspace(0.0, 19.0, 20)
    got = correlation(bath, times)
    ref = np.array([_quad_reference(bath, t) for t in times])
    scale = abs(ref[0])
    assert np.max(np.abs(got - ref)) <= 1e-9 * scale


def test_spectral_density_forms():
    hard = BathSpec.continuum(0.5, 1.0, 2.0, "hard")
    assert spectral_density(hard, 1.0) == 0.5
    assert spectral_density(hard, 3.0) == 0.0
    soft = BathSpec.continuum(0.5, 1.0, 2.0, "exponential")
    assert abs(spectral_density(soft, 2.0) - math.exp(-1.0)) <= 1e-15


def test_zero_coupling_eta():
    for bath in (BathSpec.discrete([]), BathSpec.continuum(0.0, 1.0, 1.0)):
        eta = eta_table(bath, 0.1, 5)
        assert np.all(eta.values == 0)


def test_single_mode_eta_closed_form():
    dt = 0.3
    eta = eta_table(SINGLE, dt, 8)
    k = np.arange(1, 9)
    # double integral of exp(-i(t' - t'')) over windows k steps apart
    expected = 4.0 * math.sin(dt / 2) ** 2 * np.exp(-1j * k * dt)
    assert np.max(np.abs(eta.values[1:] - expected)) <= 1e-10
    # ordered triangle t'' < t' of one window
    assert abs(eta.values[0] - ((1 - np.exp(-1j * dt)) - 1j * dt)) <= 1e-10


def test_eta_asymptotic_scaling():
    bath = ohmic(0.1, 1.0, 1.0)
    ratios = []
    for dt in (0.1, 0.05, 0.025):
        k = int(round(1.0 / dt))
        eta = eta_table(bath, dt, k)
        ratios.append(abs(eta[k]) / (abs(correlation(bath, k * dt)) * dt**2))
    dev = np.abs(np.array(ratios) - 1.0)
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] < 1e-3


def test_eta_prefix():
    bath = ohmic()
    short = eta_table(bath, 0.1, 5)
    long = eta_table(bath, 0.1, 12)
    assert np.max(np.abs(long.values[:6] - short.values)) <= 1e-10 * np.max(np.abs(long.values))
    assert np.array_equal(long.truncated(5).values, long.values[:6])


def test_eta_convergence_failure():
    with pytest.raises(NumericError) as info:
        eta_table(ohmic(), 0.1, 3, order=1, rtol=1e-16)
    assert info.value.estimate > 0


def test_eta_arguments():
    with pytest.raises(ArgumentError):
        eta_table(ohmic(), -0.1, 3)
    with pytest.raises(ArgumentError):
        eta_table(ohmic(), 0.1, -1)


def test_discretize_narrow_density():
    bath = BathSpec.continuum(2.0, 1.0, 0.01, "hard")
    modes = discretize_continuum(bath, 1, 0.01)
    assert modes.frequencies.tolist() == [0.005]
    # total weight A wc^2 / 2
    assert abs(abs(modes.couplings[0]) ** 2 - 1e-4) <= 1e-18


def test_discretize_converges_to_continuum():
    bath = BathSpec.continuum(0.1, 1.0, 1.0, "hard", beta=1.0)
    t = np.linspace(0.0, 10.0, 401)
    ref = correlation(bath, t)
    errors = []
    for n in (50, 100, 200, 400):
        c = correlation(discretize_continuum(bath, n, 5.0), t)
        errors.append(np.max(np.abs(c - ref)))
    assert errors[2] < 1e-3 * abs(ref[0])
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_bath_validation():
    with pytest.raises(ArgumentError):
        BathSpec.continuum(0.1, 1.0, 1.0, "gaussian")
    with pytest.raises(ArgumentError):
        discretize_continuum(SINGLE, 3, 1.0)
