"""Complex saddle points (quantum orbits) and saddle-point amplitudes.

Direct orbit: p + A(t_s) = i kappa, Im t_s > 0.

Rescattered orbits solve the three conditions
    (q + A(t))^2 = -kappa^2,  int_t^s (q + A) = 0,  (p + A(s))^2 = (q + A(s))^2.
The return condition is solved in closed form for q, leaving a 2x2 Newton
problem in (t, s) with branches q + A(t) = i kappa and
p + A(s) = sign (q + A(s)); sign = -1 is backscattering.

Saddle-point amplitudes use a local Taylor expansion of the exponent obtained
by FFT on small polycircles, so the same code handles the one-dimensional
direct integral and the two-dimensional rescattering integral, including
higher asymptotic orders.
"""
from dataclasses import dataclass, field
import itertools
from math import factorial

import numpy as np

from .model import ModelParams, vector_potential, field_integrals, exit_time
from .amplitudes import (volkov_action_direct, return_momentum, reduced_phase,
                         outer_phase, tmatrix_continued, spreading_factor, _as_params)
from .specfun import gaussian_saddle_factor, cubic_phase_integral

NEWTON_MAXITER = 50
RESIDUAL_TOL = 1e-10
DEDUP_TOL = 1e-6


class SaddleError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


class RejectedRootError(SaddleError):
    pass


@dataclass
class DirectSaddle:
    t_s: complex
    residual: float
    converged: bool


@dataclass
class RescatterSaddle:
    t_s: complex
    s_s: complex
    q_s: complex
    residual: float
    converged: bool
    branch_id: str
    residuals: tuple = field(default=(), repr=False)


def _ap(t, params):
    return params.E0 * np.cos(params.omega * t) ** 2


def solve_direct_saddle(p, params, t0=None):
    """Newton for p + A(t) = i kappa from t_r + i kappa / |E(t_r)|."""
    params = _as_params(params)
    kappa = params.kappa
    if t0 is None:
        tr = exit_time(p, params)
        t0 = tr + 1j * kappa / max(_ap(tr, params), 1e-12)
    t = complex(t0)
    trace = []
    for _ in range(NEWTON_MAXITER):
        g = p + vector_potential(t, params) - 1j * kappa
        dt = g / _ap(t, params)
        t -= dt
        trace.append(t)
        if abs(dt) < 1e-15 * (1 + abs(t)):
            break
    k = p + vector_potential(t, params)
    res = abs(k * k + kappa ** 2)
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        raise SaddleError(f"direct saddle did not converge at p={p}", trace)
    if abs(t.real) >= params.t_f or t.imag <= 0:
        raise RejectedRootError(f"unphysical direct saddle {t} at p={p}", trace)
    return DirectSaddle(t_s=t, residual=res, converged=True)


# local Taylor coefficients by FFT on polycircles

def taylor_coefficients(f, x0, r=0.25, N=16):
    """c[a, b, ...] = coefficient of dx^a dy^b ... of analytic f at x0."""
    n = len(x0)
    th = np.exp(2j * np.pi * np.arange(N) / N)
    grids = np.meshgrid(*([th] * n), indexing="ij")
    pts = [x0[i] + r * grids[i] for i in range(n)]
    c = np.fft.fftn(f(pts)) / N ** n
    for i in range(n):
        sh = [1] * n
        sh[i] = N
        c = c / (r ** np.arange(N)).reshape(sh)
    return c


def _grad_hess(c, n):
    g = np.empty(n, complex)
    H = np.empty((n, n), complex)
    for i in range(n):
        m = [0] * n
        m[i] = 1
        g[i] = c[tuple(m)]
        for j in range(n):
            m = [0] * n
            m[i] += 1
            m[j] += 1
            H[i, j] = c[tuple(m)] * np.prod([factorial(k) for k in m])
    return g, H


def find_saddle(f, x, maxiter=80, tol=1e-12, step_cap=0.5, r=0.2, N=12):
    """Newton on grad f = 0 with FFT derivatives; returns (x, |grad|)."""
    x = np.array(x, complex)
    n = len(x)
    for _ in range(maxiter):
        g, H = _grad_hess(taylor_coefficients(f, x, r, N), n)
        dx = np.linalg.solve(H, -g)
        big = np.max(np.abs(dx))
        if big > step_cap:
            dx *= step_cap / big
        x = x + dx
        if big < tol:
            break
    g, _ = _grad_hess(taylor_coefficients(f, x, r, N), n)
    return x, float(np.max(np.abs(g)))


def _sym_chol(G):
    """Complex-symmetric Cholesky G = L L^T."""
    n = len(G)
    L = np.zeros_like(G)
    for j in range(n):
        L[j, j] = np.sqrt(G[j, j] - np.sum(L[j, :j] ** 2))
        for i in range(j + 1, n):
            L[i, j] = (G[i, j] - np.sum(L[i, :j] * L[j, :j])) / L[j, j]
    return L


def laplace_orders(f, x, order=0, r=0.3, N=24, sqrt_det=None):
    """Asymptotic value of int exp(f) around the saddle x, orders 0..2.

    Returns (values per order, sqrt(det(-H))).  Corrections are Gaussian
    moments of the Taylor remainder R3, R4, ... evaluated with a Hermite rule.
    """
    n = len(x)
    c = taylor_coefficients(f, x, r, N)
    f0 = c[(0,) * n]
    _, H = _grad_hess(c, n)
    sd = np.sqrt(np.linalg.det(-H)) if sqrt_det is None else sqrt_det
    lead = np.exp(f0) * (2 * np.pi) ** (n / 2) / sd
    vals = [lead]
    if order == 0:
        return vals, sd
    L = _sym_chol(np.linalg.inv(-H))
    z, wz = np.polynomial.hermite_e.hermegauss(14)
    wz = wz / np.sqrt(2 * np.pi)
    Z = np.meshgrid(*([z] * n), indexing="ij")
    Wt = np.ones_like(Z[0])
    for Wi in np.meshgrid(*([wz] * n), indexing="ij"):
        Wt = Wt * Wi
    X = [sum(L[i, j] * Z[j] for j in range(n)) for i in range(n)]

    def R(k):
        out = 0
        for m in itertools.product(range(k + 1), repeat=n):
            if sum(m) == k:
                term = c[m]
                for i in range(n):
                    term = term * X[i] ** m[i]
                out = out + term
        return out

    def E(P):
        return np.sum(Wt * P)

    R3, R4 = R(3), R(4)
    o1 = E(R4 + R3 ** 2 / 2)
    vals.append(lead * (1 + o1))
    if order >= 2:
        R5, R6 = R(5), R(6)
        o2 = E(R6 + R3 * R5 + R4 ** 2 / 2 + R3 ** 2 * R4 / 2 + R3 ** 4 / 24)
        vals.append(lead * (1 + o1 + o2))
    return vals, sd


# direct SPA

DIRECT_ORDERS = ("gaussian", "cubic", "laplace1", "laplace2")


def _sd_derivs(p, t, params):
    k = p + vector_potential(t, params)
    a1 = _ap(t, params)
    a2 = -params.E0 * params.omega * np.sin(2 * params.omega * t)
    s2 = k * a1
    s3 = a1 * a1 + k * a2
    return s2, s3


def spa_direct_amplitude(p, params, order="cubic", saddle=None):
    """Saddle-point m_D from the potential-vertex integrand at t_s.

    order: "gaussian"; "cubic" (phase to third order, Airy route, default);
    "laplace1"/"laplace2" (full asymptotic corrections to first/second order).
    """
    params = _as_params(params)
    if order not in DIRECT_ORDERS:
        raise ValueError(f"unknown order {order!r}")
    sd = solve_direct_saddle(p, params) if saddle is None else saddle
    t = sd.t_s
    pref = 1j * params.kappa ** 1.5 / np.sqrt(2 * np.pi)
    s0 = volkov_action_direct(p, t, params)
    s2, s3 = _sd_derivs(p, t, params)
    if order in ("gaussian", "cubic"):
        if s2 == 0 or order == "cubic":
            kern = cubic_phase_integral(s2 / 2, s3 / 6)
        else:
            kern = gaussian_saddle_factor(s2)
        return pref * np.exp(1j * s0) * kern
    f = lambda x: 1j * volkov_action_direct(p, x[0], params)
    vals, _ = laplace_orders(f, np.array([t]), order=int(order[-1]))
    return pref * vals[-1]


# rescattering saddles (pure phase)

def _reduced_system(p, x, sign, params):
    t, s = x
    q = return_momentum(t, s, params)
    At = vector_potential(t, params)
    As = vector_potential(s, params)
    F = np.array([q + At - 1j * params.kappa, (p + As) - sign * (q + As)])
    dqt = (At + q) / (s - t)
    dqs = -(As + q) / (s - t)
    apt, aps = _ap(t, params), _ap(s, params)
    J = np.array([[dqt + apt, dqs],
                  [-sign * dqt, aps - sign * (dqs + aps)]])
    return F, J


def full_residuals(p, t, s, q, params):
    """The three saddle conditions evaluated at (t, s, q)."""
    kappa = params.kappa
    At = vector_potential(t, params)
    As = vector_potential(s, params)
    i1t, _ = field_integrals(t, params)
    i1s, _ = field_integrals(s, params)
    r1 = (q + At) ** 2 + kappa ** 2
    r2 = q * (s - t) + (i1t - i1s)
    r3 = (p + As) ** 2 - (q + As) ** 2
    return abs(r1), abs(r2), abs(r3)


def solve_reduced(p, seed, sign, params, maxiter=NEWTON_MAXITER):
    x = np.array(seed, complex)
    trace = []
    for _ in range(maxiter):
        F, J = _reduced_system(p, x, sign, params)
        dx = np.linalg.solve(J, -F)
        big = np.max(np.abs(dx))
        if big > 2.0:
            dx *= 2.0 / big
        x = x + dx
        trace.append(x.copy())
        if big < 1e-14 * (1 + np.max(np.abs(x))):
            break
    t, s = x
    q = return_momentum(t, s, params)
    return t, s, q, trace


def _classify(t, s, sign, params):
    if sign < 0 and abs(s.real - t.real) < 0.25 * params.t_f and t.imag > s.imag > 0:
        return "under_barrier"
    return "backscatter" if sign < 0 else "forward"


def solve_rescatter_saddles(p, params, include_all=False, seeds=None):
    """Converged rescattering saddles at p, deduplicated and labelled.

    Only the under-the-barrier branch is returned unless include_all.
    Returns an empty list when nothing physical converges.
    """
    params = _as_params(params)
    try:
        td = solve_direct_saddle(p, params).t_s
    except SaddleError:
        td = 1j * params.kappa / params.E0
    if seeds is None:
        seeds = []
        for mult in (2.6, 2.0, 3.2):
            seeds.append((-1, [td.real + 1j * mult * td.imag, td.real + 0.93j * td.imag]))
        for off in (-1.0, 0.0, 1.0):
            seeds.append((1, [td + off, td.conjugate() + off]))
            seeds.append((-1, [td + 1j * td.imag + off, td + off]))
    roots = []
    for sign, seed in seeds:
        try:
            with np.errstate(all="ignore"):
                t, s, q, _ = solve_reduced(p, seed, sign, params)
        except np.linalg.LinAlgError:
            continue
        res = full_residuals(p, t, s, q, params)
        if not all(np.isfinite(res)) or max(res) > RESIDUAL_TOL:
            continue
        if t.imag <= 0 or abs(t.real) >= params.t_f:
            continue
        if any(abs(t - r.t_s) < DEDUP_TOL and abs(s - r.s_s) < DEDUP_TOL for r in roots):
            continue
        roots.append(RescatterSaddle(t_s=t, s_s=s, q_s=q, residual=max(res), converged=True,
                                     branch_id=_classify(t, s, sign, params), residuals=res))
    if not include_all:
        roots = [r for r in roots if r.branch_id == "under_barrier"]
    return roots


# rescattering SPA with the prefactor exponentiated

def _tfun(params, tmatrix):
    if tmatrix is None:
        return lambda k: tmatrix_continued(k, params.kappa)
    return tmatrix


def _rescatter_exponent(p, params, dim=1, tmatrix=None):
    T = _tfun(params, tmatrix)

    def pre(t, s):
        return spreading_factor(t, s, dim) * T(p + vector_potential(s, params))

    def make(x0):
        ref = pre(*x0)

        def f(x):
            t, s = x
            ph = reduced_phase(t, s, params) + outer_phase(p, s, params)
            return 1j * ph + np.log(pre(t, s) / ref)
        return f, np.log(ref)
    return make


def _exp_saddle(p, x, params, dim=1, tmatrix=None):
    make = _rescatter_exponent(p, params, dim, tmatrix)
    f, _ = make(x)
    x, g = find_saddle(f, x)
    return x, g


def _homotopy_seed(p, params, x_pure, dim=1, steps=10, tmatrix=None):
    """Deform from the pure-phase saddle (lam=0) to the exponentiated one."""
    T = _tfun(params, tmatrix)

    def pre(t, s):
        return spreading_factor(t, s, dim) * T(p + vector_potential(s, params))

    x = np.array(x_pure, complex) + 0.05j
    for lam in np.linspace(0, 1, steps + 1)[1:]:
        ref = pre(*x)

        def f(y, lam=lam, ref=ref):
            t, s = y
            ph = reduced_phase(t, s, params) + outer_phase(p, s, params)
            return 1j * ph + lam * np.log(pre(t, s) / ref)
        x, _ = find_saddle(f, x)
    return x


def exponentiated_pair(params, dim=1, offset=0.02, tmatrix=None):
    """The mirror pair of exponentiated rescattering saddles at p0 = -A(0)."""
    params = _as_params(params)
    p0 = -vector_potential(0.0, params)
    pure = solve_rescatter_saddles(p0 + offset, params)
    if not pure:
        raise SaddleError("no under-the-barrier saddle to start the homotopy from")
    xa = _homotopy_seed(p0 + offset, params, [pure[0].t_s, pure[0].s_s], dim, tmatrix=tmatrix)
    xa, _ = _exp_saddle(p0, xa, params, dim, tmatrix)
    xb, _ = _exp_saddle(p0, -np.conj(xa), params, dim, tmatrix)
    return p0, xa, xb


def spa_rescatter_spectrum(p_grid, params, order=0, dim=1, max_step=0.05, vertex=None,
                           tmatrix=None):
    """SPA m_R on a momentum grid, summing the tracked mirror pair.

    Saddles are continued in p from -A(0) outward; the square-root branch of
    the Hessian determinant is chosen by continuity.  Returns (values, info)
    where info["flagged"] marks points whose modulus jumped by > 50% against
    the neighbour on the same continuation path.
    """
    params = _as_params(params)
    p_grid = np.asarray(p_grid, dtype=float)
    p0, xa, xb = exponentiated_pair(params, dim, tmatrix=tmatrix)
    vert = params.kappa ** 1.5 / np.sqrt(2 * np.pi) if vertex is None else vertex
    order_i = int(order)
    out = np.zeros(len(p_grid), complex)
    flagged = np.zeros(len(p_grid), bool)
    saddles = {}

    def walk(targets):
        xs = [xa.copy(), xb.copy()]
        sds = [None, None]
        cur = p0
        prev_val = None
        for idx in targets:
            pt = p_grid[idx]
            n_sub = max(1, int(np.ceil(abs(pt - cur) / max_step)))
            for pp in np.linspace(cur, pt, n_sub + 1)[1:]:
                total = 0j
                for k in range(2):
                    mk = _rescatter_exponent(pp, params, dim, tmatrix)
                    f, logref = mk(xs[k])
                    xs[k], _ = find_saddle(f, xs[k])
                    f, logref = mk(xs[k])
                    vals, sd = _branch_laplace(f, xs[k], order_i, sds[k])
                    sds[k] = sd
                    total += np.exp(logref) * vals[-1]
            cur = pt
            val = vert * total
            if prev_val is not None and abs(abs(val) - abs(prev_val)) > 0.5 * abs(prev_val):
                flagged[idx] = True
            prev_val = val
            out[idx] = val
            saddles[idx] = (xs[0].copy(), xs[1].copy())

    up = [i for i in np.argsort(p_grid) if p_grid[i] >= p0]
    dn = [i for i in np.argsort(p_grid)[::-1] if p_grid[i] < p0]
    walk(up)
    walk(dn)
    return out, {"flagged": flagged, "saddles": saddles, "p0": p0}


def _branch_laplace(f, x, order, sd_prev):
    vals, sd = laplace_orders(f, x, order=order)
    if sd_prev is not None and abs(sd - sd_prev) > abs(sd + sd_prev):
        vals, sd = laplace_orders(f, x, order=order, sqrt_det=-sd)
    return vals, sd


def spa_rescatter_amplitude(p, params, order=0, dim=1):
    """SPA m_R at a single momentum (continuation from -A(0) to p)."""
    vals, info = spa_rescatter_spectrum([p], params, order, dim)
    return vals[0]


def saddle_diagnostics(p, params):
    """Real and imaginary parts of the saddle times and the recollision energy."""
    params = _as_params(params)
    d = solve_direct_saddle(p, params)
    rs = solve_rescatter_saddles(p, params)
    rec = {"p": p, "Re_t_direct": d.t_s.real, "Im_t_direct": d.t_s.imag}
    if rs:
        r = rs[0]
        rec.update({"Re_t_s": r.t_s.real, "Im_t_s": r.t_s.imag,
                    "Re_s_s": r.s_s.real, "Im_s_s": r.s_s.imag,
                    "eps_r": abs(r.q_s + vector_potential(r.s_s, params)) ** 2 / 2})
    else:
        rec.update({k: np.nan for k in ("Re_t_s", "Im_t_s", "Re_s_s", "Im_s_s", "eps_r")})
    return rec
