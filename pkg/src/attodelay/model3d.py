"""3D zero-range atom: amplitudes along the polarization axis.

Bound state phi(r) = sqrt(kappa / 2 pi) e^{-kappa r} / r, unit norm.  Its
momentum representation with plane waves (2 pi)^{-3/2} e^{i q.r} is

    phi(q) = sqrt(kappa) / (pi (kappa^2 + q^2)),

since int e^{-i q.r} e^{-kappa r} / r d^3r = 4 pi / (kappa^2 + q^2).

The scattering amplitude of the zero-range well is f(k) = -1/(kappa + i k);
in the same plane-wave normalization T = -f / (4 pi^2).

The final transverse momentum is zero, so along the polarization axis the
pipeline is the 1D one with three changes: the dipole and vertex constants,
the T matrix, and the intermediate spreading (2 pi/(i(s-t)))^{3/2}.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import exp1

from .model import ModelParams, derive_params, electric_field, vector_potential
from .amplitudes import (AmplitudeSpectrum, SingularInputError, _adaptive_gl, _as_params,
                         _initial_panels, _j_integrals, gl_nodes, rescatter_contour,
                         volkov_action_direct)


def bound_norm_3d(kappa):
    """Constant c of phi(q) = c / (kappa^2 + q^2): sqrt(kappa) / pi."""
    return np.sqrt(kappa) / np.pi


def bound_ft_3d(q, kappa):
    """<q|phi> for the 3D zero-range bound state; q is the 3-momentum magnitude."""
    q = np.asarray(q)
    return bound_norm_3d(kappa) / (kappa ** 2 + q * q)


def dipole_ft_3d(kz, kperp2, kappa):
    """<k| z |phi> = i d phi / d k_z."""
    return -2j * bound_norm_3d(kappa) * kz / (kappa ** 2 + kz * kz + kperp2) ** 2


def vertex_3d(kappa):
    """-<q|V|phi> = (kappa^2 + q^2)/2 phi(q): momentum independent."""
    return 0.5 * bound_norm_3d(kappa)


def scattering_amplitude_3d(k, kappa):
    """f(k) = -1/(kappa + i k)."""
    return -1.0 / (kappa + 1j * np.asarray(k))


def tmatrix_3d(k, kappa):
    """On-shell T = -f / (4 pi^2) = 1 / (4 pi^2 (kappa + i k)), k > 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise SingularInputError("on-shell 3D T-matrix needs k > 0")
    return -scattering_amplitude_3d(k, kappa) / (4 * np.pi ** 2)


def tmatrix_3d_continued(k, kappa):
    """Analytic continuation of tmatrix_3d from k > 0 to signed k."""
    return 1.0 / (4 * np.pi ** 2 * (kappa + 1j * np.asarray(k)))


def direct_amplitude_3d(p, params, rtol=1e-11, atol=1e-14, t_ref=None):
    """Length-form direct amplitude at longitudinal momentum p, p_perp = 0."""
    params = _as_params(params)
    pa = np.atleast_1d(np.asarray(p, dtype=float))
    kappa = params.kappa

    def f(pp, t):
        k = pp + vector_potential(t, params)
        return -1j * electric_field(t, params) * dipole_ft_3d(k, 0.0, kappa) * np.exp(
            1j * volkov_action_direct(pp, t, params, t_ref))

    tf = params.t_f
    val = _adaptive_gl(f, -tf, tf, pa, _initial_panels(params, pa), rtol, atol)
    return val if np.ndim(p) else val[0]


def rescatter_amplitude_3d(p, params, **kw):
    """Contour-route rescattered amplitude with 3D spreading, vertex and T."""
    params = _as_params(params)
    kappa = params.kappa
    return rescatter_contour(p, params, dim=3, vertex=vertex_3d(kappa),
                             tmatrix=lambda k: tmatrix_3d_continued(k, kappa), **kw)


def q_gaussian_3d(t, s, params):
    """Inner q-integral by its Gaussian at q_s (transverse q_s = 0)."""
    kappa = params.kappa
    j1, j2 = _j_integrals(t, s, params)
    tau = s - t
    qs = -j1 / tau
    ph = 0.5 * kappa ** 2 * t - 0.5 * (j2 - j1 * j1 / tau)
    spread = np.sqrt(2 * np.pi / (1j * tau)) ** 3
    return dipole_ft_3d(qs + vector_potential(t, params), 0.0, kappa) * spread * np.exp(1j * ph)


def q_full_3d(t, s, params, nz=None):
    """int d^3q <q+A(t)|z|phi> exp(i kappa^2 t/2 - i/2 int_t^s (q+A)^2) without
    the Gaussian approximation.

    The transverse integral is exact: with u = q_perp^2 and b = i tau/2,
    int_0^inf e^{-b u} du / (a + u)^2 = 1/a - b e^{a b} E1(a b).
    The longitudinal integral is done by composite Gauss-Legendre."""
    kappa = params.kappa
    At = vector_potential(t, params)
    j1, j2 = _j_integrals(t, s, params)
    tau = s - t
    qs = -j1 / tau
    Q = max(40.0, 120.0 / np.sqrt(tau))
    nz = int(max(200, 0.25 * tau * Q * Q)) if nz is None else nz
    v, wv = gl_nodes(-Q, Q, 16, nz)
    qz = qs + v
    ph = 0.5 * kappa ** 2 * t - 0.5 * (qz * qz * tau + 2 * qz * j1 + j2)
    kz = qz + At
    a = kappa ** 2 + kz * kz
    b = 0.5j * tau
    perp = 1 / a - b * np.exp(a * b) * exp1(a * b)
    g = -2j * bound_norm_3d(kappa) * kz * np.pi * perp
    return np.sum(wv * g * np.exp(1j * ph))


@dataclass
class Spectrum3D(AmplitudeSpectrum):
    """AmplitudeSpectrum of the 3D model at zero transverse momentum."""
    dim: int = 3


def spectrum_3d(params, p_grid, include_rescattering=True):
    p = np.asarray(p_grid, dtype=float)
    mD = direct_amplitude_3d(p, params)
    mR = rescatter_amplitude_3d(p, params) if include_rescattering else np.zeros(len(p), complex)
    return Spectrum3D(p, mD, mR, "numeric", params)


def spa_spectrum_3d(params, p_grid, direct_order="cubic", rescatter_order=0):
    """Saddle-point 3D spectrum.  The direct potential-vertex SPA differs from
    the 1D one only by the ratio of the vertex constants."""
    from .saddle import SaddleError, spa_direct_amplitude, spa_rescatter_spectrum
    params = _as_params(params)
    p = np.asarray(p_grid, dtype=float)
    kappa = params.kappa
    scale = vertex_3d(kappa) / (kappa ** 1.5 / np.sqrt(2 * np.pi))
    valid = np.ones(len(p), bool)
    mD = np.zeros(len(p), complex)
    for i, pi in enumerate(p):
        try:
            mD[i] = scale * spa_direct_amplitude(pi, params, direct_order)
        except SaddleError:
            valid[i] = False
    mR, info = spa_rescatter_spectrum(p, params, rescatter_order, dim=3, vertex=vertex_3d(kappa),
                                      tmatrix=lambda k: tmatrix_3d_continued(k, kappa))
    return Spectrum3D(p, mD, mR, "spa", params, valid & ~info["flagged"])


def _amplitudes_3d(grid, params):
    return direct_amplitude_3d(grid, params), rescatter_amplitude_3d(grid, params)


def spa_shift_3d(params, n_pmd=81):
    """delta p of the 3D saddle-point spectrum on the default peak window."""
    from .observables import default_grid, momentum_shift
    return momentum_shift(spa_spectrum_3d(params, default_grid(params, n_pmd)))


def delay_curve_3d(params, ratios, n_pmd=601, T=None, x_m=None, with_spa=True):
    """ScanRows of the 3D model over E0/E_th ratios (E_th = 16/27 kappa^3).

    delta_p and the backprop delays come from the numeric amplitudes;
    delta_p_spa from the saddle-point spectrum."""
    from .observables import PeakWindowError, ScanRow, delays_for_params
    rows = []
    e_th = derive_params(params).E_th
    for r in ratios:
        pr = ModelParams(params.kappa, r * e_th, params.omega)
        try:
            row = delays_for_params(pr, n_pmd=n_pmd, T=T, with_spa=False, x_m=x_m,
                                    amplitude_fn=_amplitudes_3d)
            if with_spa:
                # the flat strong-field saddle spectrum can peak outside the window;
                # keep the numeric delays in that case
                try:
                    row.delta_p_spa = spa_shift_3d(pr)
                except PeakWindowError:
                    row.delta_p_spa = np.nan
            rows.append(row)
        except Exception as exc:  # recorded per row
            der = derive_params(pr)
            rows.append(ScanRow(pr.E0, r, der.gamma, *([np.nan] * 6), error=repr(exc)))
    return rows
