"""Observables built from the amplitudes: PMD peak, shift, delays and scans."""
from dataclasses import dataclass, asdict

import numpy as np

from .model import ModelParams, derive_params, vector_potential, electric_field
from .amplitudes import AmplitudeSpectrum, direct_amplitude, rescatter_amplitude
from .saddle import spa_direct_amplitude, spa_rescatter_spectrum, SaddleError
from .specfun import airy
from . import backprop

PEAK_HALF_WIDTH = 1.0


class PeakWindowError(ValueError):
    pass


@dataclass
class ScanRow:
    E0: float
    ratio: float
    gamma: float
    delta_p: float
    t_peak_direct: float
    t_peak_full: float
    t_avg_full: float
    t_wigner: float
    phi_e: float
    delta_p_spa: float = np.nan
    error: str = ""


@dataclass(frozen=True)
class Species:
    name: str
    ionization_potential: float

    @property
    def kappa(self):
        return np.sqrt(2 * self.ionization_potential)


# standard first ionisation energies (15.7596 eV and 13.9996 eV) in hartree
SPECIES = {
    "Ar": Species("Ar", 0.5792),
    "Kr": Species("Kr", 0.5145),
    "He": Species("He", 0.9037),
    "H": Species("H", 0.5),
}


def _half_width(params):
    # main lobe; narrowed for short pulses so the window stays inside (0, E0 t_f)
    p0 = -vector_potential(0.0, params)
    return min(PEAK_HALF_WIDTH, 0.7 * p0)


def peak_window(params):
    p0 = -vector_potential(0.0, params)
    h = _half_width(params)
    return p0 - h, p0 + h


def default_grid(params, n=201):
    """Uniform grid over the peak window plus 20% on each side."""
    p0 = -vector_potential(0.0, params)
    h = 1.2 * _half_width(params)
    return np.linspace(p0 - h, p0 + h, n)


def backprop_grid(params, n=601):
    """Momentum window covering nearly the whole range of -A (the PMD is broad)."""
    pm = params.E0 * params.t_f
    return np.linspace(0.02 * pm, 0.98 * pm, n)


def compute_pmd(params, p_grid, method="numeric", include_rescattering=True,
                spa_direct_order="cubic", spa_rescatter_order=0):
    """Amplitudes on p_grid by numeric quadrature or saddle points."""
    p = np.asarray(p_grid, dtype=float)
    if np.any(np.diff(p) <= 0):
        raise ValueError("p_grid must be strictly increasing")
    pm = params.E0 * params.t_f
    if p[0] <= 0 or p[-1] >= pm:
        raise ValueError(f"p_grid must lie inside (0, {pm:.6g})")
    valid = np.ones(len(p), bool)
    if method == "numeric":
        mD = direct_amplitude(p, params)
        mR = rescatter_amplitude(p, params) if include_rescattering else np.zeros(len(p), complex)
    elif method == "spa":
        mD = np.zeros(len(p), complex)
        for i, pi in enumerate(p):
            try:
                mD[i] = spa_direct_amplitude(pi, params, spa_direct_order)
            except SaddleError:
                valid[i] = False
        if include_rescattering:
            mR, info = spa_rescatter_spectrum(p, params, spa_rescatter_order)
            valid &= ~info["flagged"]
        else:
            mR = np.zeros(len(p), complex)
    else:
        raise ValueError(f"unknown method {method!r}")
    return AmplitudeSpectrum(p, mD, mR, method, params, valid)


def find_peak(p, w, window=None):
    """Sub-grid maximum of w inside window by a parabola through the top three samples."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if window is not None:
        sel = (p >= window[0]) & (p <= window[1])
        p, w = p[sel], w[sel]
    if len(p) < 3:
        raise PeakWindowError("window holds fewer than three samples")
    i = int(np.argmax(w))
    if i == 0 or i == len(p) - 1:
        raise PeakWindowError(f"maximum on the window boundary at p = {p[i]:.6g}")
    return backprop._peak_quadratic(p, w)


def spectrum_peak(spectrum, window=None, direct_only=False):
    window = peak_window(spectrum.params) if window is None else window
    m = spectrum.m_direct if direct_only else spectrum.m
    return find_peak(spectrum.p, np.abs(m) ** 2, window)


def momentum_shift(spectrum, window=None):
    """delta p = p_max + A(0)."""
    return spectrum_peak(spectrum, window) + vector_potential(0.0, spectrum.params)


def attoclock_angle(delta_p, params):
    """phi_e = -omega_eff delta_p / E0."""
    return -derive_params(params).omega_eff * np.asarray(delta_p) / params.E0


def wigner_time(E0, kappa=1.0, x_m=None):
    """Quasistatic Wigner delay of the triangular barrier (negative)."""
    if E0 <= 0:
        raise ValueError("E0 must be positive")
    x_m = 1.0 / kappa if x_m is None else x_m
    z = wigner_argument(E0, kappa, x_m)
    a = airy(z)
    s = (a.ai ** 2 + a.bi ** 2).real
    return -2 ** (1 / 3) / (np.pi * E0 ** (2 / 3) * s)


def wigner_argument(E0, kappa=1.0, x_m=None):
    x_m = 1.0 / kappa if x_m is None else x_m
    return (kappa ** 2 - 2 * E0 * x_m) / (2 ** (2 / 3) * E0 ** (2 / 3))


def peak_delay_estimate(p_max, params):
    """t_e ~ -(p_max + A(0)) / E0."""
    return -(p_max + vector_potential(0.0, params)) / params.E0


def average_delay_ratio(params, t0=1.0, n=20001):
    """<t_e> / t_max for t_e(t) = t0 exp(-2 kappa^3/(3F)) weighted by W = exp(-2 kappa^3/(3F))."""
    tf = params.t_f
    t = np.linspace(-tf, tf, n)
    F = np.abs(electric_field(t, params))
    a = 2 * params.kappa ** 3 / 3
    with np.errstate(divide="ignore", over="ignore"):
        W = np.where(F > 0, np.exp(-a / np.where(F > 0, F, 1.0)), 0.0)
    te = t0 * W
    t_max = t0 * np.exp(-a / params.E0)
    return np.trapezoid(te * W, t) / (t_max * np.trapezoid(W, t))


def average_delay_ratio_laplace():
    """Gaussian (Laplace) evaluation of both integrals: 1/sqrt(2)."""
    return 1 / np.sqrt(2)


def scale_delay_kappa(t_e, kappa_from, kappa_to):
    """t_e ~ 1/kappa^2."""
    if kappa_from <= 0 or kappa_to <= 0:
        raise ValueError("kappa must be positive")
    return t_e * kappa_from ** 2 / kappa_to ** 2


def delays_for_params(params, n_pmd=601, T=None, with_spa=True, x_m=None,
                      amplitude_fn=None):
    """Full single-parameter pipeline: delta p, backprop delays and Wigner time."""
    der = derive_params(params)
    grid = backprop_grid(params, n_pmd)
    if amplitude_fn is None:
        spec = compute_pmd(params, grid, "numeric")
    else:
        mD, mR = amplitude_fn(grid, params)
        spec = AmplitudeSpectrum(grid, mD, mR, "numeric", params)
    dp = momentum_shift(spec)
    full = backprop.exit_time_distribution(spec, T, "full")
    direct = backprop.exit_time_distribution(spec.direct_only(), T, "full")
    dp_spa = np.nan
    if with_spa:
        sp = compute_pmd(params, default_grid(params, 81), "spa")
        dp_spa = momentum_shift(sp)
    return ScanRow(E0=params.E0, ratio=params.E0 / der.E_th, gamma=der.gamma, delta_p=dp,
                   t_peak_direct=direct.t_peak, t_peak_full=full.t_peak, t_avg_full=full.t_mean,
                   t_wigner=wigner_time(params.E0, params.kappa, x_m),
                   phi_e=float(attoclock_angle(dp, params)), delta_p_spa=dp_spa)


def scan_delay(params_base, ratios, **kw):
    """One ScanRow per E0/E_th ratio; failures are recorded and the scan continues."""
    rows = []
    e_th = derive_params(params_base).E_th
    for r in ratios:
        params = ModelParams(params_base.kappa, r * e_th, params_base.omega)
        try:
            rows.append(delays_for_params(params, **kw))
        except Exception as exc:  # recorded per row
            der = derive_params(params)
            rows.append(ScanRow(params.E0, r, der.gamma, *([np.nan] * 6), error=repr(exc)))
    return rows


def species_shift(species, ratio, omega, n_pmd=81, method="spa"):
    """delta p and phi_e for one species at a given E0/E_th."""
    kappa = species.kappa
    params = ModelParams(kappa, ratio * 16 / 27 * kappa ** 3, omega)
    spec = compute_pmd(params, default_grid(params, n_pmd), method)
    dp = momentum_shift(spec)
    return params, dp, float(attoclock_angle(dp, params))


def species_scan(species_a, species_b, ratios, omega=0.2, n_pmd=81, method="spa"):
    """Attoclock-angle difference at matched E0/E_th, tabulated against gamma.

    gamma is reported per species and as their mean.  The saddle-point
    pipeline is the default: for short pulses the complex times come close to
    the pulse edges and the smooth edge cut-off of the numeric rescattering
    integral no longer separates the two."""
    rows = []
    for r in ratios:
        pa, dpa, fa = species_shift(species_a, r, omega, n_pmd, method)
        pb, dpb, fb = species_shift(species_b, r, omega, n_pmd, method)
        ga, gb = derive_params(pa).gamma, derive_params(pb).gamma
        rows.append({"ratio": r, "gamma": 0.5 * (ga + gb), "gamma_a": ga, "gamma_b": gb,
                     "E0_a": pa.E0, "E0_b": pb.E0, "delta_p_a": dpa, "delta_p_b": dpb,
                     "phi_a": fa, "phi_b": fb, "delta_phi": fa - fb})
    return rows


def sign_changes(values):
    v = np.sign(np.asarray(values, dtype=float))
    v = v[v != 0]
    return int(np.sum(v[1:] != v[:-1]))


def row_dict(row):
    return asdict(row)
