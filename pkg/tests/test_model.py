import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from attodelay.model import (ModelParams, derive_params, electric_field, exit_time,
                             field_integrals, threshold_field_coulomb, vector_potential,
                             UnmappableMomentumError)

P = ModelParams(1.0, 0.25, 0.05)
TF = P.t_f


def test_field_values():
    assert electric_field(0.0, P) == pytest.approx(-0.25, abs=1e-15)
    assert electric_field(TF, P) == pytest.approx(0.0, abs=1e-15)
    assert electric_field(TF / 2, P) == pytest.approx(-0.125, abs=1e-15)
    assert electric_field(TF + 3.0, P) == 0.0


def test_vector_potential_values():
    assert vector_potential(TF, P) == pytest.approx(0.0, abs=1e-15)
    assert vector_potential(0.0, P) == pytest.approx(-3.926991, abs=1e-6)
    assert vector_potential(0.0, P) == pytest.approx(-0.25 * np.pi / (4 * 0.05), rel=1e-14)
    assert vector_potential(-TF, P) == pytest.approx(-7.853982, abs=1e-6)
    # constant outside the pulse
    assert vector_potential(-TF - 5.0, P) == vector_potential(-TF, P)
    assert vector_potential(TF + 5.0, P) == 0.0


def test_vector_potential_against_quadrature():
    for t in (-20.0, 0.0, 13.0):
        ref = quad(lambda s: electric_field(s, P), t, TF, epsabs=1e-14, epsrel=1e-13)[0]
        assert vector_potential(t, P) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_field_integrals_values():
    i1, i2 = field_integrals(TF, P)
    assert (i1, i2) == (pytest.approx(0.0, abs=1e-14), pytest.approx(0.0, abs=1e-14))
    h = 1e-5
    d = (field_integrals(h, P)[0] - field_integrals(-h, P)[0]) / (2 * h)
    assert d == pytest.approx(3.926991, abs=1e-6)
    r1 = quad(lambda s: vector_potential(s, P), 0.0, TF, epsabs=1e-14, epsrel=1e-13)[0]
    r2 = quad(lambda s: vector_potential(s, P) ** 2, 0.0, TF, epsabs=1e-14, epsrel=1e-13)[0]
    i1, i2 = field_integrals(0.0, P)
    assert i1 == pytest.approx(r1, rel=1e-10)
    assert i2 == pytest.approx(r2, rel=1e-10)


def test_derive_params():
    d = derive_params(P)
    assert d.gamma == pytest.approx(0.282843, abs=1e-6)
    assert d.E_th == pytest.approx(0.592593, abs=1e-6)
    assert d.t_f == pytest.approx(31.415927, abs=1e-6)
    assert P.E0 / d.E_th == pytest.approx(0.421875, abs=1e-12)
    d2 = derive_params(ModelParams(2.0, 1.0, 0.05))
    assert d2.E_a == pytest.approx(8.0)
    assert d2.E_th == pytest.approx(4.740741, abs=1e-6)
    assert derive_params(P) == derive_params(P)


def test_threshold_field_coulomb():
    assert threshold_field_coulomb(1.345, 1) == pytest.approx(0.2424, abs=1e-4)
    assert threshold_field_coulomb(1.0, 1) == pytest.approx(2 / 27, abs=1e-12)
    assert threshold_field_coulomb(1.0, 2) == pytest.approx(0.037037, abs=1e-6)
    with pytest.raises(ValueError):
        threshold_field_coulomb(1.0, 0)


@pytest.mark.parametrize("bad", [dict(E0=-1.0), dict(kappa=0.0), dict(omega=np.nan)])
def test_invalid_params(bad):
    with pytest.raises(ValueError):
        ModelParams(**bad)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.99, 0.99))
def test_derivative_of_A_is_minus_E(u):
    t = u * TF
    h = 1e-4
    d = (vector_potential(t + h, P) - vector_potential(t - h, P)) / (2 * h)
    assert d == pytest.approx(-electric_field(t, P), abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0))
def test_A_minus_A0_is_odd(u):
    t = u * TF
    a0 = vector_potential(0.0, P)
    assert abs((vector_potential(t, P) - a0) + (vector_potential(-t, P) - a0)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95))
def test_field_integrals_property(u):
    t = u * TF
    r1 = quad(lambda s: vector_potential(s, P), t, TF, epsabs=1e-14, epsrel=1e-13)[0]
    assert field_integrals(t, P)[0] == pytest.approx(r1, rel=1e-10, abs=1e-12)


def test_exit_time():
    assert exit_time(P0 := -vector_potential(0.0, P), P) == pytest.approx(0.0, abs=1e-10)
    # A ~ (t_f - t)^3 near the end of the pulse
    gaps = [TF - exit_time(p, P) for p in (1e-3, 1e-6, 1e-9)]
    assert gaps[0] > gaps[1] > gaps[2] > 0 and gaps[2] < 0.02
    te = exit_time(P0 + 0.3, P)
    assert te == pytest.approx(-0.3 / P.E0, rel=0.05)
    with pytest.raises(UnmappableMomentumError):
        exit_time(-0.1, P)
