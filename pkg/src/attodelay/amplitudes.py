"""Numeric first- and second-order SFA amplitudes for the 1D zero-range atom.

Phase convention: Volkov phases are referenced to the end of the pulse t_f
(optionally to a later t_ref, which only adds a global per-p phase).

Direct amplitude
    Three forms are provided.  "length" is the raw length-gauge integral
    -i int E(t) d(p + A(t)) e^{i S_D} dt.  Its integrand vanishes smoothly at
    the pulse edges, so it carries no edge artefacts and equals the
    contribution of the complex saddle.  "potential" uses the constant
    delta-potential vertex; integrating by parts shows that it differs from
    the length form exactly by the overlap boundary term, which is a pure
    pulse-edge artefact.  "length_subtracted" is length minus boundary term,
    which reproduces "potential" identically.

Rescattered amplitude
    "contour" (default): the q-integral is done by its exact Gaussian, the
    t-integral is deformed onto the steepest-descent line through the
    ionisation saddle t*(s) (q_s + A(t*) = i kappa), and the outer s-integral
    runs along the real axis with a smooth switch-off near the pulse edges.
    This keeps the under-the-barrier saddle contribution and drops the
    t = s end-point and pulse-edge terms.
    "q_spa": literal real-axis evaluation of the length-vertex expression with
    T(|p + A(s)|); kept as a cross-check, it is dominated by end-point terms.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ModelParams, field_integrals, vector_potential, electric_field

_SQ2PI = np.sqrt(2 * np.pi)


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


class SingularInputError(ValueError):
    pass


@lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gl_nodes(a, b, n, panels):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    h = 0.5 * (edges[1:] - edges[:-1])
    m = 0.5 * (edges[1:] + edges[:-1])
    return (m[:, None] + h[:, None] * x).ravel(), (h[:, None] * w).ravel()


def dipole_ft(q, kappa):
    """<q| x |phi> for the bound state sqrt(kappa) e^{-kappa|x|}; odd in q."""
    q = np.asarray(q)
    return (-4j * kappa * q) / (_SQ2PI * (kappa ** 2 + q ** 2) ** 2) * np.sqrt(kappa)


def bound_ft(q, kappa):
    """<q|phi> = (2 pi)^-1/2 2 kappa^{3/2} / (kappa^2 + q^2)."""
    q = np.asarray(q)
    return 2 * kappa ** 1.5 / (_SQ2PI * (kappa ** 2 + q ** 2))


def volkov_action_direct(p, t, params, t_ref=None):
    """S_D(p, t) = kappa^2 t / 2 - 1/2 int_t^{t_ref} (p + A)^2.

    t_ref defaults to t_f; a later reference only adds -p^2 (t_ref - t_f)/2.
    """
    p = np.asarray(p)
    i1, i2 = field_integrals(t, params)
    s = 0.5 * params.kappa ** 2 * t - 0.5 * (p * p * (params.t_f - t) + 2 * p * i1 + i2)
    if t_ref is not None:
        s = s - 0.5 * p * p * (t_ref - params.t_f)
    return s


def overlap(p, t, params, t_ref=None):
    """<psi_p^V(t)|phi(t)> with both time phases included."""
    k = np.asarray(p) + vector_potential(t, params)
    return bound_ft(k, params.kappa) * np.exp(1j * volkov_action_direct(p, t, params, t_ref))


def boundary_term(p, params, t_ref=None):
    """-[<psi_p^V|phi>] between -t_f and t_f."""
    tf = params.t_f
    return -(overlap(p, tf, params, t_ref) - overlap(p, -tf, params, t_ref))


def _direct_integrand(form, params, t_ref):
    kappa = params.kappa
    if form == "potential":
        c = 1j * kappa ** 1.5 / _SQ2PI
        return lambda p, t: c * np.exp(1j * volkov_action_direct(p, t, params, t_ref))
    return lambda p, t: -1j * electric_field(t, params) * dipole_ft(
        p + vector_potential(t, params), kappa) * np.exp(
        1j * volkov_action_direct(p, t, params, t_ref))


def _adaptive_gl(fun, a, b, p, panels, rtol, atol, max_panels=1 << 14, n=16):
    """Composite GL on a doubling sequence of panels, vectorised over p."""
    prev = None
    while panels <= max_panels:
        x, w = gl_nodes(a, b, n, panels)
        val = fun(p[:, None], x[None, :]) @ w
        if prev is not None:
            err = np.abs(val - prev)
            if np.all(err <= atol + rtol * np.abs(val)):
                return val
        prev = val
        panels *= 2
    raise QuadratureError("composite Gauss-Legendre did not converge",
                          estimate=float(np.max(err)))


def _initial_panels(params, p):
    # about two panels per local oscillation period of exp(i S_D)
    amax = params.E0 * params.t_f
    kmax = max(np.max(np.abs(p)), np.max(np.abs(p - amax)))
    rate = 0.5 * (kmax ** 2 + params.kappa ** 2)
    return int(max(32, np.ceil(2 * params.t_f * rate / np.pi)))


def direct_amplitude(p, params, form="length", rtol=1e-11, atol=1e-14, t_ref=None):
    """Direct amplitude m_D(p) by adaptive quadrature over the pulse.

    form: "length" (edge-free, default), "potential" or "length_subtracted".
    """
    params = _as_params(params)
    pa = np.atleast_1d(np.asarray(p, dtype=float))
    if form not in ("length", "potential", "length_subtracted"):
        raise ValueError(f"unknown form {form!r}")
    base = "potential" if form == "potential" else "length"
    f = _direct_integrand(base, params, t_ref)
    tf = params.t_f
    val = _adaptive_gl(f, -tf, tf, pa, _initial_panels(params, pa), rtol, atol)
    if form == "length_subtracted":
        val = val - boundary_term(pa, params, t_ref)
    return val if np.ndim(p) else val[0]


def tmatrix_1d(k, kappa):
    """Free-space T-matrix of the delta well, -(kappa/2pi)/(1 - i kappa/|k|)."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise SingularInputError("T-matrix is singular at k = 0")
    return -(kappa / (2 * np.pi)) / (1 - 1j * kappa / np.abs(k))


def tmatrix_continued(k, kappa):
    """Analytic continuation of tmatrix_1d from k > 0: -(kappa/2pi) k/(k - i kappa).

    Finite at k = 0 (where it vanishes); used at complex recollision times."""
    k = np.asarray(k)
    return -(kappa / (2 * np.pi)) * k / (k - 1j * kappa)


def _tmatrix_abs(k, kappa):
    a = np.abs(k)
    return -(kappa / (2 * np.pi)) * a / (a - 1j * kappa)


# rescattering: closed forms of the intermediate Volkov propagation

def _j_integrals(t, s, params):
    i1t, i2t = field_integrals(t, params)
    i1s, i2s = field_integrals(s, params)
    return i1t - i1s, i2t - i2s  # int_t^s A, int_t^s A^2


def return_momentum(t, s, params):
    """q_s(t, s) = -(1/(s - t)) int_t^s A: stationary intermediate momentum."""
    j1, _ = _j_integrals(t, s, params)
    return -j1 / (s - t)


def reduced_phase(t, s, params):
    """kappa^2 t/2 - 1/2 int_t^s (q_s + A)^2: ionisation plus propagation phase."""
    j1, j2 = _j_integrals(t, s, params)
    return 0.5 * params.kappa ** 2 * t - 0.5 * (j2 - j1 * j1 / (s - t))


def outer_phase(p, s, params, t_ref=None):
    """-1/2 int_s^{t_ref} (p + A)^2."""
    i1, i2 = field_integrals(s, params)
    ph = -0.5 * (p * p * (params.t_f - s) + 2 * p * i1 + i2)
    if t_ref is not None:
        ph = ph - 0.5 * p * p * (t_ref - params.t_f)
    return ph


def spreading_factor(t, s, dim=1):
    """Gaussian q-integral normalisation (2 pi / (i (s - t)))^{dim/2}."""
    return np.sqrt(2 * np.pi / (1j * (s - t))) ** dim


def rescatter_integrand(p, t, s, params, inner="q_spa", nq=None):
    """Length-vertex rescattering integrand at a real point t < s.

    inner="q_spa": Gaussian q-integral with prefactors at q_s.
    inner="q_full": explicit quadrature over real q (oracle).
    Includes T(|p + A(s)|) and the outer Volkov phase.
    """
    params = _as_params(params)
    kappa = params.kappa
    outer = _tmatrix_abs(p + vector_potential(s, params), kappa) * np.exp(
        1j * outer_phase(p, s, params))
    At = vector_potential(t, params)
    Et = electric_field(t, params)
    if inner == "q_spa":
        q = return_momentum(t, s, params)
        g = dipole_ft(q + At, kappa) * spreading_factor(t, s) * np.exp(
            1j * reduced_phase(t, s, params))
    elif inner == "q_full":
        g = _q_full(t, s, params, nq)
    else:
        raise ValueError(f"unknown inner method {inner!r}")
    return -Et * g * outer


def _q_full(t, s, params, nq=None):
    """int dq d(q + A(t)) exp(i kappa^2 t/2 - i/2 int_t^s (q+A)^2) on the real line."""
    kappa = params.kappa
    At = vector_potential(t, params)
    j1, j2 = _j_integrals(t, s, params)
    tau = s - t
    qs = -j1 / tau
    # the dipole decays like q^-3; truncate where the tail is below 1e-7
    Q = max(60.0, 200.0 / np.sqrt(tau))
    phase_span = 0.5 * tau * Q * Q
    panels = int(max(400, phase_span / 1.5)) if nq is None else nq
    v, w = gl_nodes(-Q, Q, 16, panels)
    q = qs + v
    ph = 0.5 * kappa ** 2 * t - 0.5 * (q * q * tau + 2 * q * j1 + j2)
    return np.sum(w * dipole_ft(q + At, kappa) * np.exp(1j * ph))


# contour route

def _ap(t, params):
    return params.E0 * np.cos(params.omega * t) ** 2  # dA/dt


def edge_window(s, params, width=None):
    """Smooth switch 0 -> 1 over `width` inside each pulse edge (C-infinity)."""
    width = 0.25 * params.t_f if width is None else width
    y = (params.t_f - np.abs(s)) / width
    yc = np.clip(y, 1e-12, 1 - 1e-12)
    with np.errstate(over="ignore"):
        v = 1.0 / (1.0 + np.exp(1.0 / yc - 1.0 / (1.0 - yc)))
    return np.where(y >= 1, 1.0, np.where(y <= 0, 0.0, v))


def ionisation_time(s, params, t0=None, maxiter=60, tol=1e-13):
    """Complex t* with q_s(t*, s) + A(t*) = i kappa, Newton from t0."""
    kappa = params.kappa
    t = s + 2j * kappa / max(_ap(s, params), 1e-3) if t0 is None else t0
    for _ in range(maxiter):
        k = return_momentum(t, s, params) + vector_potential(complex(t), params)
        dt = (k - 1j * kappa) / (k / (s - t) + _ap(t, params))
        t = t - dt
        if abs(dt) < tol * (1 + abs(t)):
            return t
    raise QuadratureError(f"ionisation saddle did not converge at s={s:.6g}",
                          estimate=abs(dt))


def track_ionisation_times(s, params, active=None):
    """t*(s) on a sorted s grid by continuation outward from s = 0."""
    s = np.asarray(s, dtype=float)
    active = np.ones(len(s), bool) if active is None else active
    out = np.full(len(s), np.nan + 0j)
    i0 = int(np.argmin(np.abs(s)))
    t0 = ionisation_time(s[i0], params, s[i0] + 2j * params.kappa / params.E0)
    out[i0] = t0
    for rng in (range(i0 + 1, len(s)), range(i0 - 1, -1, -1)):
        t = t0
        for j in rng:
            if not active[j]:
                break
            t = ionisation_time(s[j], params, t)
            out[j] = t
    return out


def inner_contour_integral(s, tstar, params, n=64, span=7.0, dim=1):
    """int dt (2 pi/(i(s-t)))^{dim/2} e^{i phi_red(t, s)} along the
    steepest-descent line through t*(s)."""
    kappa = params.kappa
    k = 1j * kappa
    fpp = 1j * k * (k / (s - tstar) + _ap(tstar, params))
    d = np.exp(0.5j * (np.pi - np.angle(fpp)))
    d = np.where(d.real < 0, -d, d)
    sig = 1 / np.sqrt(np.abs(fpp))
    x, w = _leggauss(n)
    tau = span * sig[:, None] * x
    wt = span * sig[:, None] * w
    t = tstar[:, None] + d[:, None] * tau
    g = spreading_factor(t, s[:, None], dim) * np.exp(1j * reduced_phase(t, s[:, None], params))
    return np.sum(wt * g, axis=1) * d


@lru_cache(maxsize=32)
def _contour_kernel(params, panels, n_inner, span, width, dim):
    tf = params.t_f
    s, ws = gl_nodes(-tf, tf, 16, panels)
    win = edge_window(s, params, width)
    active = win > 0
    ts = track_ionisation_times(s, params, active)
    H = np.zeros(len(s), complex)
    H[active] = inner_contour_integral(s[active], ts[active], params, n_inner, span, dim)
    return s, ws * win, H, ts


def _default_panels(params):
    return int(np.ceil(10 * params.t_f))


def rescatter_contour(p, params, panels=None, n_inner=64, span=7.0, width=None,
                      tmatrix="continued", dim=1, vertex=None, t_ref=None):
    """Rescattered amplitude, contour route (see module docstring)."""
    params = _as_params(params)
    panels = _default_panels(params) if panels is None else panels
    s, ws, H, _ = _contour_kernel(params, panels, n_inner, span, width, dim)
    pa = np.atleast_1d(np.asarray(p, dtype=float))
    k = pa[:, None] + vector_potential(s, params)[None, :]
    if tmatrix == "continued":
        T = tmatrix_continued(k, params.kappa)
    elif tmatrix == "abs":
        T = _tmatrix_abs(k, params.kappa)
    else:
        T = tmatrix(k)
    vert = params.kappa ** 1.5 / _SQ2PI if vertex is None else vertex
    ph = outer_phase(pa[:, None], s[None, :], params, t_ref)
    val = vert * (T * np.exp(1j * ph)) @ (ws * H)
    return val if np.ndim(p) else val[0]


@lru_cache(maxsize=16)
def _real_axis_kernel(params, panels, n_u):
    """K(s) = int_{-t_f}^{s} dt [-E d(q_s+A(t)) sqrt(2pi/(i(s-t))) e^{i phi_red}]
    with t = s - u^2."""
    tf = params.t_f
    kappa = params.kappa
    s, ws = gl_nodes(-tf, tf, 16, panels)
    x, w = _leggauss(16)
    K = np.empty(len(s), complex)
    for j, sj in enumerate(s):
        umax = np.sqrt(sj + tf)
        npan = max(4, int(np.ceil(n_u * umax / np.sqrt(2 * tf))))
        u, wu = gl_nodes(0.0, umax, 16, npan)
        t = sj - u * u
        q = return_momentum(t, sj, params)
        g = -electric_field(t, params) * dipole_ft(q + vector_potential(t, params), kappa)
        g = g * np.sqrt(2 * np.pi / 1j) * 2 * np.exp(1j * reduced_phase(t, sj, params))
        # sqrt(2pi/(i u^2)) * 2u du = sqrt(2pi/i) * 2 du
        K[j] = np.sum(wu * g)
    return s, ws, K


def rescatter_real_axis(p, params, panels=None, n_u=400, t_ref=None):
    """Literal real-axis length-vertex amplitude with T(|p + A(s)|)."""
    params = _as_params(params)
    panels = _default_panels(params) if panels is None else panels
    s, ws, K = _real_axis_kernel(params, panels, n_u)
    pa = np.atleast_1d(np.asarray(p, dtype=float))
    T = _tmatrix_abs(pa[:, None] + vector_potential(s, params)[None, :], params.kappa)
    ph = outer_phase(pa[:, None], s[None, :], params, t_ref)
    val = (T * np.exp(1j * ph)) @ (ws * K)
    return val if np.ndim(p) else val[0]


def rescatter_amplitude(p, params, method="contour", **kw):
    """Rescattered amplitude m_R(p).

    method="contour" (default) or "q_spa" (literal real-axis cross-check).
    """
    if method == "contour":
        return rescatter_contour(p, params, **kw)
    if method == "q_spa":
        return rescatter_real_axis(p, params, **kw)
    raise ValueError(f"unknown rescattering method {method!r}")


def _as_params(params):
    if isinstance(params, ModelParams):
        return params
    return ModelParams(**params) if isinstance(params, dict) else ModelParams(*params)


@dataclass
class AmplitudeSpectrum:
    """Direct and rescattered amplitudes on a momentum grid."""
    p: np.ndarray
    m_direct: np.ndarray
    m_rescatter: np.ndarray
    method: str
    params: ModelParams
    valid: np.ndarray = None

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        n = len(self.p)
        if np.any(np.diff(self.p) <= 0):
            raise ValueError("momentum grid must be strictly increasing")
        self.m_direct = np.asarray(self.m_direct, dtype=complex)
        self.m_rescatter = (np.zeros(n, complex) if self.m_rescatter is None
                            else np.asarray(self.m_rescatter, dtype=complex))
        if len(self.m_direct) != n or len(self.m_rescatter) != n:
            raise ValueError("amplitude arrays must match the momentum grid")
        if self.method not in ("numeric", "spa"):
            raise ValueError(f"unknown method tag {self.method!r}")
        self.valid = np.ones(n, bool) if self.valid is None else np.asarray(self.valid, bool)

    @property
    def m(self):
        return self.m_direct + self.m_rescatter

    @property
    def w(self):
        return np.abs(self.m) ** 2

    def direct_only(self):
        return AmplitudeSpectrum(self.p, self.m_direct, np.zeros_like(self.m_direct),
                                 self.method, self.params, self.valid)
