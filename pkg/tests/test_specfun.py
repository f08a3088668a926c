import cmath

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from attodelay.specfun import (AiryAccuracyError, Z_MAX, _series_loss, airy, airy_asymptotic,
                               airy_series, cubic_phase_integral, gaussian_saddle_factor)


def _mp_airy(z):
    return (complex(mp.airyai(z)), complex(mp.airyai(z, 1)),
            complex(mp.airybi(z)), complex(mp.airybi(z, 1)))


def test_airy_at_zero():
    a = airy(0.0)
    assert a.ai.real == pytest.approx(0.3550280539, abs=1e-10)
    assert a.bi.real == pytest.approx(0.6149266274, abs=1e-10)
    assert a.ai_prime.real == pytest.approx(-0.2588194038, abs=1e-10)


@pytest.mark.parametrize("z", [0.5, -3.0, 2 + 2j, -5 - 1j, 7.5, -12.0, 10j, 20 * cmath.exp(2.5j),
                               25.0, -29.0, 4.1 + 0.2j])
def test_airy_against_mpmath(z):
    a = airy(z)
    ref = _mp_airy(z)
    for got, want in zip((a.ai, a.ai_prime, a.bi, a.bi_prime), ref):
        assert abs(got - want) <= 5e-11 * abs(want)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, Z_MAX), st.floats(-np.pi, np.pi))
def test_airy_random_against_mpmath(r, th):
    z = r * cmath.exp(1j * th)
    a = airy(z)
    ref = _mp_airy(z)
    for got, want in zip((a.ai, a.ai_prime, a.bi, a.bi_prime), ref):
        assert abs(got - want) <= 5e-11 * abs(want)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 8), st.floats(-np.pi, np.pi))
def test_wronskian(r, th):
    """W = 1/pi to 1e-10, relative to the size of the two products (they reach
    ~1e11 off the real axis, where an absolute 1e-10 is below double rounding)."""
    a = airy(r * cmath.exp(1j * th))
    w = a.ai * a.bi_prime - a.ai_prime * a.bi
    scale = max(1.0, abs(a.ai * a.bi_prime) + abs(a.ai_prime * a.bi))
    assert abs(w - 1 / np.pi) < 1e-10 * scale


@pytest.mark.parametrize("th", [2 * np.pi / 3, -2 * np.pi / 3])
@pytest.mark.parametrize("r", [6.05, 6.2, 10.0])
def test_airy_on_sector_edge(r, th):
    z = r * cmath.exp(1j * th)
    a = airy(z)
    for got, want in zip((a.ai, a.ai_prime, a.bi, a.bi_prime), _mp_airy(z)):
        assert abs(got - want) <= 1e-12 * abs(want)


def test_branches_agree_in_overlap_annulus():
    """Series vs asymptotic on 16 rays for 5 <= |z| <= 7.

    Bi, Bi' agree to 1e-8 relative everywhere.  Ai, Ai' from the series lose
    digits near the positive real axis (recessive Ai from growing series), so
    there they are compared relative to the dominant solution, and relative to
    themselves where the estimated cancellation is below e^11."""
    for r in (5.0, 6.0, 7.0):
        for k in range(16):
            z = r * cmath.exp(2j * np.pi * k / 16)
            s = airy_series(z)
            a = airy_asymptotic(z)
            scale = max(abs(v) for v in a)
            for i in range(4):
                assert abs(s[i] - a[i]) <= 1e-8 * scale
            for i in (2, 3):
                assert abs(s[i] - a[i]) <= 1e-8 * abs(a[i])
            if _series_loss(z) < 11:
                for i in (0, 1):
                    assert abs(s[i] - a[i]) <= 1e-8 * abs(a[i])


def test_airy_window():
    with pytest.raises(AiryAccuracyError):
        airy(31.0)
    with pytest.raises(AiryAccuracyError):
        airy(complex(np.nan, 0))


def test_gaussian_saddle_factor_values():
    s = np.sqrt(2 * np.pi)
    assert gaussian_saddle_factor(1) == pytest.approx(s * cmath.exp(1j * np.pi / 4), abs=1e-14)
    assert gaussian_saddle_factor(-1) == pytest.approx(s * cmath.exp(-1j * np.pi / 4), abs=1e-14)
    assert gaussian_saddle_factor(1j) == pytest.approx(s, abs=1e-14)
    with pytest.raises(ZeroDivisionError):
        gaussian_saddle_factor(0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 100), st.floats(-np.pi + 0.01, np.pi - 0.01))
def test_gaussian_factor_square(r, th):
    c = r * cmath.exp(1j * th)
    # off the branch cut of sqrt(2pi/(-ic)): -ic not on the negative axis
    if abs(cmath.phase(-1j * c)) > np.pi - 0.02:
        return
    g = gaussian_saddle_factor(c)
    assert abs(g * g * (-1j * c) - 2 * np.pi) < 1e-12 * 2 * np.pi


def test_cubic_at_zero_alpha():
    v = cubic_phase_integral(0, 1 / 3)
    assert v == pytest.approx(2 * np.pi * 0.3550280539, abs=1e-9)
    # the real-line Airy integral
    assert v.real == pytest.approx(2.230707, abs=1e-6)


def test_cubic_gaussian_limit():
    for a in (1.0, 2j + 0.5, 3.0 - 0.2j):
        beta = 1e-5 * abs(a) ** 1.5
        g = gaussian_saddle_factor(2 * a)
        assert abs(cubic_phase_integral(a, beta) / g - 1) < 1e-3
    with pytest.raises(ZeroDivisionError):
        cubic_phase_integral(1.0, 0.0)


def _descent_quadrature(alpha, beta):
    """int exp(i(alpha u^2 + beta u^3)) along steepest-descent paths traced as
    ODEs in the phase parameter, from the saddle u = 0 into both valleys."""
    phi = lambda u: 1j * (alpha * u * u + beta * u ** 3)
    dphi = lambda u: 1j * (2 * alpha * u + 3 * beta * u * u)
    d0 = cmath.exp(1j * (np.pi / 4 - cmath.phase(alpha) / 2))
    total = 0j
    for sgn in (1, -1):
        # parametrise by tau = -Re(phi) growth: u' = -conj(phi')/|phi'|^2 ... use arclength
        def rhs(_, y):
            u = y[0] + 1j * y[1]
            g = dphi(u)
            d = -np.conj(g) / abs(g)
            f = np.exp(phi(u)) * d
            return [d.real, d.imag, f.real, f.imag]
        h = 1e-6
        u0 = sgn * d0 * h
        sol = solve_ivp(rhs, (0, 60), [u0.real, u0.imag, 0.0, 0.0], rtol=1e-11, atol=1e-14)
        y = sol.y[:, -1]
        part = y[2] + 1j * y[3] + np.exp(phi(0)) * u0
        total += sgn * part
    return total


def test_cubic_against_descent_quadrature():
    ref = _descent_quadrature(1.0, 0.1)
    assert abs(cubic_phase_integral(1.0, 0.1) / ref - 1) < 1e-6
