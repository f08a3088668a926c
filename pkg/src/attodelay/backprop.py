"""Backpropagation of the asymptotic wave packet to tunnel-exit times.

After the pulse the electron moves freely, so the packet at T > t_f is

    psi(x, T) = int dp m(p) exp(i[p x - p^2 (T - t_f)/2]).

The local momentum p(x) = Re(-i psi'/psi) is mapped to an exit time through
the vanishing-velocity condition p + A(t_e) = 0, and the exit-time density is
|psi|^2 |dx/dt_e| ("full").  The "simple" estimate skips the wave packet and
uses w(p) |dp/dt_e| = w(-A(t_e)) |E(t_e)| directly.

psi is evaluated by FFT on a fine uniform momentum grid; m(p) is carried to
that grid by splining its slowly varying part after removing a smooth fit
of its phase.
"""
from dataclasses import dataclass
import warnings

import numpy as np
from scipy.interpolate import CubicSpline

from .model import exit_time, electric_field, vector_potential, UnmappableMomentumError

DEFAULT_TAU = 2000.0
NODE_THRESHOLD = 1e-6
TAPER_FRACTION = 0.1


class BranchExtractionError(RuntimeError):
    pass


@dataclass
class ExitTimeDistribution:
    t_e: np.ndarray
    density: np.ndarray
    t_peak: float
    t_mean: float
    method: str
    T_asym: float


@dataclass
class WavefunctionSample:
    x: np.ndarray
    psi: np.ndarray
    local_p: np.ndarray
    local_p_imag: np.ndarray
    valid: np.ndarray


def exit_time_map(p, params):
    """t_e with p + A(t_e) = 0; raises UnmappableMomentumError outside (0, E0 t_f)."""
    return exit_time(p, params)


def taper(p, fraction=TAPER_FRACTION):
    """Raised-cosine window rising over the outer `fraction` of each end."""
    p = np.asarray(p, dtype=float)
    u = (p - p[0]) / (p[-1] - p[0])
    w = np.ones_like(u)
    lo = u < fraction
    hi = u > 1 - fraction
    w[lo] = 0.5 * (1 - np.cos(np.pi * u[lo] / fraction))
    w[hi] = 0.5 * (1 - np.cos(np.pi * (1 - u[hi]) / fraction))
    return w


def classical_phase(p, params):
    """S_D(p, t_e(p)) - kappa^2 t_e / 2: its p-derivative is minus the
    displacement of an electron released at rest at t_e, which carries the
    fast part of the phase of m(p)."""
    from .amplitudes import volkov_action_direct
    pm = params.E0 * params.t_f
    pc = np.clip(p, 1e-9 * pm, (1 - 1e-9) * pm)
    te = exit_time(pc, params)
    return volkov_action_direct(pc, te, params) - 0.5 * params.kappa ** 2 * te


def _resample(p, m, p_fine, params):
    """Carry m(p) to a finer grid by splining m e^{-i phi} with phi the
    classical phase plus a smooth fit of the remainder."""
    ref = classical_phase(p, params)
    r = m * np.exp(-1j * ref)
    phase = np.unwrap(np.angle(r))
    if np.max(np.abs(np.diff(phase))) > 1.5:
        warnings.warn("momentum grid too coarse to resolve the phase of m(p)")
    u = (p - p.mean()) / np.ptp(p)
    coef = np.polyfit(u, phase, 4, w=np.abs(m) + 1e-300)
    r = r * np.exp(-1j * np.polyval(coef, u))
    sr = CubicSpline(p, r.real)
    si = CubicSpline(p, r.imag)
    uf = (p_fine - p.mean()) / np.ptp(p)
    return (sr(p_fine) + 1j * si(p_fine)) * np.exp(
        1j * (np.polyval(coef, uf) + classical_phase(p_fine, params)))


def _tau(T, params):
    tau = DEFAULT_TAU if T is None else T - params.t_f
    if tau <= 0:
        raise ValueError("evaluation time must lie after the pulse")
    return tau


def _fine_grid(spectrum, tau, m=None):
    """Uniform momentum grid fine enough to sample the packet without aliasing,
    with g_k = m(p_k) taper(p_k) exp(-i p_k^2 tau/2) dp."""
    params = spectrum.params
    p = spectrum.p
    m = spectrum.m if m is None else m
    p_lo, p_hi = p[0], p[-1]
    # x extent: free drift plus the displacement accumulated during the pulse
    margin = 2 * (max(abs(p_lo), abs(p_hi)) * 2 * params.t_f + params.E0 * params.t_f ** 2) + 200
    span = (p_hi - p_lo) * tau + margin
    n_min = int(np.ceil((p_hi - p_lo) * span / (2 * np.pi))) + 1
    N = 1 << int(np.ceil(np.log2(max(n_min, 1024))))
    dp = (p_hi - p_lo) / (N - 1)
    pf = p_lo + dp * np.arange(N)
    g = _resample(p, m, pf, params) * taper(pf) * np.exp(-0.5j * pf * pf * tau) * dp
    return pf, g, p_lo * tau - 0.5 * margin


def _packet_fft(spectrum, tau, m=None):
    """psi(x, T) and psi'(x, T) on a uniform x grid covering the whole packet."""
    pf, g, x0 = _fine_grid(spectrum, tau, m)
    N = len(pf)
    dp = pf[1] - pf[0]
    x = x0 + 2 * np.pi / (N * dp) * np.arange(N)
    mod = np.exp(1j * dp * np.arange(N) * x0)
    base = np.exp(1j * pf[0] * x)
    psi = base * np.fft.ifft(g * mod) * N
    dpsi = base * np.fft.ifft(1j * pf * g * mod) * N
    return x, psi, dpsi


def asymptotic_wavefunction(x, T, spectrum, m=None, chunk=512):
    """psi(x, T) at the requested positions.

    Returns (psi, low) where low flags points below the node threshold
    relative to the packet maximum."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tau = _tau(T, spectrum.params)
    pf, g, _ = _fine_grid(spectrum, tau, m)
    psi = np.empty(len(x), complex)
    for a in range(0, len(x), chunk):
        psi[a:a + chunk] = np.exp(1j * np.outer(x[a:a + chunk], pf)) @ g
    _, psi_g, _ = _packet_fft(spectrum, tau, m)
    low = np.abs(psi) ** 2 < NODE_THRESHOLD * np.max(np.abs(psi_g)) ** 2
    if np.any(low):
        warnings.warn("asymptotic_wavefunction: some x lie outside the mapped packet")
    return psi, low


def sample_packet(spectrum, T=None, m=None):
    """Wave packet on its natural FFT grid with local momenta."""
    params = spectrum.params
    tau = _tau(T, params)
    x, psi, dpsi = _packet_fft(spectrum, tau, m)
    dens = np.abs(psi) ** 2
    valid = dens >= NODE_THRESHOLD * dens.max()
    with np.errstate(all="ignore"):
        lp = -1j * dpsi / psi
    return WavefunctionSample(x=x, psi=psi, local_p=lp.real, local_p_imag=lp.imag, valid=valid)


def local_momentum(x, T, spectrum):
    """Re(-i psi'/psi) at x; NaN where |psi|^2 is below the node threshold."""
    s = sample_packet(spectrum, T)
    x = np.asarray(x, dtype=float)
    pr = np.interp(x, s.x, np.where(s.valid, s.local_p, np.nan))
    pi = np.interp(x, s.x, np.where(s.valid, s.local_p_imag, np.nan))
    return pr, pi


def _peak_quadratic(x, y):
    i = int(np.argmax(y))
    if i == 0 or i == len(y) - 1:
        return float(x[i])
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    d = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d
    if a >= 0:
        return float(x1)
    return float(-b / (2 * a))


def distribution_moments(t_e, density):
    """Peak (quadratic interpolation) and mean (trapezoid) of a density."""
    t_e = np.asarray(t_e, dtype=float)
    density = np.asarray(density, dtype=float)
    if len(t_e) == 0:
        raise ValueError("empty distribution")
    mean = np.trapezoid(t_e * density, t_e) / np.trapezoid(density, t_e)
    return _peak_quadratic(t_e, density), float(mean)


def _finish(t_e, dens, method, T):
    order = np.argsort(t_e)
    t_e, dens = t_e[order], dens[order]
    keep = np.concatenate([[True], np.diff(t_e) > 0])
    t_e, dens = t_e[keep], dens[keep]
    dens = dens / np.trapezoid(dens, t_e)
    t_peak, t_mean = distribution_moments(t_e, dens)
    return ExitTimeDistribution(t_e=t_e, density=dens, t_peak=t_peak, t_mean=t_mean,
                                method=method, T_asym=T)


def exit_time_distribution(spectrum, T=None, method="full", n_simple=4001, m=None):
    """Exit-time density from the asymptotic packet ("full") or from w(p) ("simple")."""
    params = spectrum.params
    T = params.t_f + DEFAULT_TAU if T is None else T
    mm = spectrum.m if m is None else m
    p = spectrum.p
    # trust only the untapered part of the momentum window
    lo = p[0] + TAPER_FRACTION * (p[-1] - p[0])
    hi = p[-1] - TAPER_FRACTION * (p[-1] - p[0])
    if method == "simple":
        w = np.abs(mm) ** 2
        te_lo, te_hi = exit_time(np.array([hi, lo]), params)
        te = np.linspace(te_lo, te_hi, n_simple)
        ws = CubicSpline(p, w)
        dens = np.clip(ws(-vector_potential(te, params)), 0, None) * np.abs(electric_field(te, params))
        return _finish(te, dens, "simple", T)
    if method != "full":
        raise ValueError(f"unknown method {method!r}")
    if T - params.t_f < 1000:
        raise ValueError("full backpropagation needs T - t_f >= 1000")
    s = sample_packet(spectrum, T, mm)
    ok = s.valid & (s.local_p > lo) & (s.local_p < hi)
    dens = np.abs(s.psi) ** 2
    i0 = int(np.argmax(np.where(ok, dens, -1.0)))
    if not ok[i0]:
        raise BranchExtractionError("no valid packet core inside the momentum window")
    # principal monotone branch around the global maximum
    a = i0
    while a > 0 and ok[a - 1] and s.local_p[a - 1] < s.local_p[a]:
        a -= 1
    b = i0
    while b < len(s.x) - 1 and ok[b + 1] and s.local_p[b + 1] > s.local_p[b]:
        b += 1
    if b - a < 5:
        raise BranchExtractionError(
            f"local momentum not monotone around the packet maximum (branch {a}..{b})")
    x = s.x[a:b + 1]
    te = exit_time(s.local_p[a:b + 1], params)
    jac = np.abs(np.gradient(x, te))
    return _finish(te, dens[a:b + 1] * jac, "full", T)


__all__ = ["ExitTimeDistribution", "WavefunctionSample", "exit_time_map", "taper",
           "asymptotic_wavefunction", "local_momentum", "sample_packet",
           "exit_time_distribution", "distribution_moments",
           "UnmappableMomentumError", "BranchExtractionError"]
