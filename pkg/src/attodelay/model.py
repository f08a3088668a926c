"""Half-cycle pulse and zero-range atom: field, vector potential and derived scalars.

All quantities are in atomic units.  The pulse is

    E(t) = -E0 cos^2(omega t),   |t| <= t_f = pi / (2 omega),

and zero outside.  The vector potential is referenced to the end of the
pulse, A(t) = -int_{t_f}^{t} E, so that A(t_f) = 0 and the final drift
momentum of an electron at rest at time t is -A(t).
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Atom and pulse parameters.

    kappa : sqrt(2 I_p) of the bound state
    E0    : peak field strength
    omega : angular frequency of the cos^2 envelope
    """
    kappa: float = 1.0
    E0: float = 0.25
    omega: float = 0.05

    def __post_init__(self):
        for name in ("kappa", "E0", "omega"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def t_f(self):
        return np.pi / (2 * self.omega)

    @property
    def ip(self):
        return 0.5 * self.kappa ** 2


@dataclass(frozen=True)
class DerivedParams:
    t_f: float
    omega_eff: float
    gamma: float
    E_a: float
    E_th: float


def derive_params(params):
    """Derived scalars: pulse half-duration, effective frequency, Keldysh gamma,
    atomic field kappa^3 and the 1D threshold field (16/27) kappa^3."""
    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    kappa, E0, omega = params.kappa, params.E0, params.omega
    omega_eff = np.sqrt(2.0) * omega
    E_a = kappa ** 3
    return DerivedParams(t_f=np.pi / (2 * omega), omega_eff=omega_eff,
                         gamma=omega_eff * kappa / E0, E_a=E_a,
                         E_th=16.0 / 27.0 * E_a)


def threshold_field_coulomb(kappa, Z):
    """Barrier-suppression threshold for a Coulomb tail of charge Z,
    E_th = (2/27)(kappa/Z) kappa^3."""
    if Z <= 0:
        raise ValueError("effective charge Z must be positive")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 2.0 / 27.0 * (kappa / Z) * kappa ** 3


# in-pulse analytic expressions; these accept complex time

def _A_in(t, E0, w, tf):
    return -E0 * ((tf - t) / 2 - np.sin(2 * w * t) / (4 * w))


def _F1(t, E0, w, tf):
    # antiderivative of A
    return -E0 * ((tf * t - t * t / 2) / 2 + np.cos(2 * w * t) / (8 * w * w))


def _F2(t, E0, w, tf):
    # antiderivative of A^2
    u = tf - t
    s2, c2 = np.sin(2 * w * t), np.cos(2 * w * t)
    aa = -u ** 3 / 12
    ab = (-u * c2 / (2 * w) - s2 / (4 * w * w)) / (8 * w)
    bb = (t / 2 - np.sin(4 * w * t) / (8 * w)) / (16 * w * w)
    return E0 * E0 * (aa - 2 * ab + bb)


def electric_field(t, params):
    """E(t) = -E0 cos^2(omega t) inside the pulse, 0 outside.  Complex t uses
    the in-pulse expression."""
    E0, w, tf = params.E0, params.omega, params.t_f
    if np.iscomplexobj(t):
        return -E0 * np.cos(w * t) ** 2
    t = np.asarray(t, dtype=float)
    out = np.where(np.abs(t) <= tf, -E0 * np.cos(w * t) ** 2, 0.0)
    return out[()] if out.ndim == 0 else out


def vector_potential(t, params):
    """A(t) = -E0[(t_f - t)/2 - sin(2 omega t)/(4 omega)] inside the pulse,
    0 after it and -E0 t_f before it.  Complex t uses the in-pulse formula."""
    E0, w, tf = params.E0, params.omega, params.t_f
    if np.iscomplexobj(t):
        return _A_in(t, E0, w, tf)
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, -tf, tf)
    out = _A_in(tc, E0, w, tf)
    out = np.where(t >= tf, 0.0, out)
    out = np.where(t <= -tf, -E0 * tf, out)
    return out[()] if out.ndim == 0 else out


def field_integrals(t, params):
    """Closed forms of (int_t^{t_f} A dtau, int_t^{t_f} A^2 dtau).

    Real t outside the pulse is handled piecewise (A is constant before the
    pulse and zero after it).  Complex t uses the in-pulse analytic continuation.
    """
    E0, w, tf = params.E0, params.omega, params.t_f
    if np.iscomplexobj(t):
        i1 = _F1(tf, E0, w, tf) - _F1(t, E0, w, tf)
        i2 = _F2(tf, E0, w, tf) - _F2(t, E0, w, tf)
        return i1, i2
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, -tf, tf)
    i1 = _F1(tf, E0, w, tf) - _F1(tc, E0, w, tf)
    i2 = _F2(tf, E0, w, tf) - _F2(tc, E0, w, tf)
    before = np.minimum(t + tf, 0.0)  # -(length of the pre-pulse stretch)
    a_pre = -E0 * tf
    i1 = i1 - before * a_pre
    i2 = i2 - before * a_pre ** 2
    if i1.ndim == 0:
        return i1[()], i2[()]
    return i1, i2


def field_derivative(t, params):
    """dA/dt = -E(t), continued analytically for complex t."""
    return -electric_field(t, params)


class UnmappableMomentumError(ValueError):
    pass


def exit_time(p, params):
    """Real t_e with p + A(t_e) = 0, by bisection on the monotone A.

    Defined for 0 < p < E0 t_f; vectorised over p."""
    pa = np.asarray(p, dtype=float)
    pmax = params.E0 * params.t_f
    if np.any(~(pa > 0)) or np.any(~(pa < pmax)):
        raise UnmappableMomentumError(
            f"momentum outside the mapped range (0, {pmax:.6g})")
    lo = np.full(pa.shape, -params.t_f)
    hi = np.full(pa.shape, params.t_f)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        up = pa + _A_in(mid, params.E0, params.omega, params.t_f) > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    out = 0.5 * (lo + hi)
    return out[()] if out.ndim == 0 else out
