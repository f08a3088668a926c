"""Airy functions and stationary-phase kernels.

Airy functions are computed in-house:

* Maclaurin series for |z| <= Z_SWITCH,
* the large-|z| asymptotic expansion for |z| > Z_SWITCH, truncated at its
  smallest term and completed by a Borel-summed remainder (first hyperasymptotic
  level), which keeps the expansion accurate down to |z| ~ 4,
* connection formulas to reach the sectors |arg z| > 2 pi / 3 and Bi.

Inside the disk the series for Ai cancels catastrophically close to the positive
real axis (Ai is recessive there while the two series grow like Bi), so Ai and
Ai' fall back to the completed asymptotic expansion where the estimated loss
of digits is large.
"""
from dataclasses import dataclass
from math import gamma as _gamma

import numpy as np

Z_SWITCH = 6.0
Z_MAX = 30.0

_AI0 = 3.0 ** (-2.0 / 3.0) / _gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / _gamma(1.0 / 3.0)
_SQRT3 = np.sqrt(3.0)
_W = np.exp(2j * np.pi / 3)  # e^{2 pi i/3}

# u_k, v_k of the Airy asymptotic expansions
_NCOEF = 90
_U = np.empty(_NCOEF)
_V = np.empty(_NCOEF)
_U[0] = _V[0] = 1.0
for _k in range(1, _NCOEF):
    _U[_k] = _U[_k - 1] * (6 * _k - 5) * (6 * _k - 3) * (6 * _k - 1) / ((2 * _k - 1) * 216 * _k)
    _V[_k] = -_U[_k] * (6 * _k + 1) / (6 * _k - 1)

_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(80)
_NHYPER = 6


class AiryAccuracyError(ValueError):
    """Argument outside the window where the documented accuracy holds."""


@dataclass(frozen=True)
class AiryPair:
    ai: complex
    bi: complex
    ai_prime: complex
    bi_prime: complex


def _maclaurin(z):
    """Ai, Ai', Bi, Bi' from the two Maclaurin series f, g."""
    z = complex(z)
    z3 = z * z * z
    f = fp = g = 0j
    tf, tg = 1.0 + 0j, z
    tfp, tgp = 0j, 1.0 + 0j
    f, g, gp = tf, tg, tgp
    for k in range(1, 200):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        tfp = z * z / 2 if k == 1 else tfp * z3 / ((3 * k - 3) * (3 * k - 1))
        tgp = tgp * z3 / ((3 * k - 2) * (3 * k))
        f += tf
        g += tg
        fp += tfp
        gp += tgp
        size = abs(tf) + abs(tg) + abs(tfp) + abs(tgp)
        if size < 1e-18 * (abs(f) + abs(g) + abs(fp) + abs(gp)):
            break
    c1, c2 = _AI0, -_AIP0
    return (c1 * f - c2 * g, c1 * fp - c2 * gp,
            _SQRT3 * (c1 * f + c2 * g), _SQRT3 * (c1 * fp + c2 * gp))


def _terminant(n, F, pole_side=None):
    """Borel sum of sum_{k>=n} Gamma(k) / (-F)^k.

    The Laplace integral is taken along a ray rotated away from the pole at
    t = -F, which is the lateral sum continuous from inside the sector.
    pole_side (sign of arg(-F)) is passed by the caller on the sector edge,
    where rounding can put -F on either side of the real axis."""
    if pole_side is None:
        pole_side = np.sign(np.angle(-F)) or 1.0
    phi = -pole_side * np.pi / 4
    c = np.cos(phi)
    t = _LAG_X * np.exp(1j * phi) / c
    g = (-t / F) ** (n - 1) * (-1 / F) / (1 + t / F)
    return np.sum(_LAG_W * np.exp(_LAG_X - t) * g) * np.exp(1j * phi) / c


def _asym_series(zeta, coef, sign_tail, pole_side=None):
    """sum_k (-1)^k c_k zeta^-k truncated at the smallest term plus the
    Borel-summed remainder."""
    k = np.arange(_NCOEF)
    terms = coef * (-1.0 / zeta) ** k
    mags = np.abs(terms)
    n = int(np.argmin(mags[1:]) + 1)
    head = np.sum(terms[:n])
    if n < _NHYPER + 2:
        return head
    F = 2 * zeta
    tail = sum(_terminant(n - j, F, pole_side) * coef[j] * zeta ** (-j) for j in range(_NHYPER))
    return head + sign_tail * tail / (2 * np.pi)


def _ai_sector(z):
    """Ai, Ai' from the completed expansion, valid for |arg z| <= 2 pi/3."""
    zeta = 2.0 / 3.0 * z ** 1.5
    q = z ** 0.25
    e = np.exp(-zeta) / (2 * np.sqrt(np.pi))
    # upper half plane: arg(-2 zeta) = arg(zeta) - pi < 0
    side = None if z.imag == 0 else (-1.0 if z.imag > 0 else 1.0)
    ai = e / q * _asym_series(zeta, _U, 1.0, side)
    aip = -e * q * _asym_series(zeta, _V, -1.0, side)
    return ai, aip


def _ai_outer(z):
    z = complex(z)
    if abs(np.angle(z)) <= 2 * np.pi / 3 + 1e-12:
        return _ai_sector(z)
    # Ai(z) + w Ai(w z) + w^2 Ai(w^2 z) = 0
    a1, d1 = _ai_sector(z * _W)
    a2, d2 = _ai_sector(z / _W)
    ai = -_W * a1 - a2 / _W
    aip = -_W ** 2 * d1 - d2 / _W ** 2
    return ai, aip


def _bi_outer(z):
    z = complex(z)
    a1, d1 = _ai_outer(z * _W)
    a2, d2 = _ai_outer(z / _W)
    e = np.exp(1j * np.pi / 6)
    bi = e * a1 + a2 / e
    bip = e * _W * d1 + d2 / (e * _W)
    return bi, bip


def _series_loss(z):
    """log of the expected cancellation factor of the Ai series."""
    zeta = 2.0 / 3.0 * complex(z) ** 1.5
    return abs(zeta) + zeta.real


def airy(z):
    """Ai, Bi and their derivatives at complex z with |z| <= 30.

    Maclaurin series for |z| <= 6, completed asymptotic expansion beyond.
    Relative accuracy is 1e-12 or better over most of the window; the worst
    case, about 4e-11, is Ai' near |z| ~ 4 close to the positive real axis
    where the two branches hand over.
    """
    z = complex(z)
    if not np.isfinite(z):
        raise AiryAccuracyError("non-finite argument")
    r = abs(z)
    if r > Z_MAX:
        raise AiryAccuracyError(f"|z| = {r:.3g} exceeds the accuracy window {Z_MAX}")
    if r <= Z_SWITCH:
        ai, aip, bi, bip = _maclaurin(z)
        if _series_loss(z) > 11.0:
            ai, aip = _ai_outer(z)
    else:
        ai, aip = _ai_outer(z)
        bi, bip = _bi_outer(z)
    if z.imag == 0.0:
        ai, aip, bi, bip = (complex(v.real, 0.0) for v in (ai, aip, bi, bip))
    return AiryPair(ai=ai, bi=bi, ai_prime=aip, bi_prime=bip)


def airy_series(z):
    """Ai, Ai', Bi, Bi' from the Maclaurin series alone (reference branch)."""
    return _maclaurin(z)


def airy_asymptotic(z):
    """Ai, Ai', Bi, Bi' from the asymptotic branch alone (reference branch)."""
    ai, aip = _ai_outer(z)
    bi, bip = _bi_outer(z)
    return ai, aip, bi, bip


def gaussian_saddle_factor(second_deriv):
    """sqrt(2 pi / (-i c)), the integral of exp(i c u^2 / 2) over the
    steepest-descent line, principal branch."""
    c = complex(second_deriv)
    if c == 0:
        raise ZeroDivisionError("degenerate saddle: zero curvature")
    return np.sqrt(2 * np.pi / (-1j * c))


# valleys of exp(i s^3/3) and the Airy representation of each oriented pair
_S_VALLEYS = np.array([np.pi / 6, 5 * np.pi / 6, -np.pi / 2])


def _nearest(angles, a):
    d = np.angle(np.exp(1j * (angles - a)))
    return int(np.argmin(np.abs(d)))


def _airy_contour(i_from, i_to, x):
    """int exp(i(s^3/3 + x s)) ds between two valleys of the cubic."""
    # 5pi/6 -> pi/6 : 2 pi Ai(x); -pi/2 -> 5pi/6 : 2 pi w Ai(w x);
    # pi/6 -> -pi/2 : 2 pi w^2 Ai(w^2 x)
    table = {(1, 0): (1.0, 1.0), (2, 1): (_W, _W), (0, 2): (_W ** 2, _W ** 2)}
    if (i_from, i_to) in table:
        pre, rot = table[(i_from, i_to)]
        return 2 * np.pi * pre * airy(rot * x).ai
    pre, rot = table[(i_to, i_from)]
    return -2 * np.pi * pre * airy(rot * x).ai


def cubic_phase_integral(alpha, beta):
    """int exp(i(alpha u^2 + beta u^3)) du along the steepest-descent path
    through the saddle u = 0.

    Completing the cube maps the integral onto a single Airy function whose
    contour joins the two valleys reached from u = 0.  When the two saddles
    are far apart (|x| beyond the Airy window) the Gaussian expansion in
    beta^2 / alpha^3 is summed directly.
    """
    alpha, beta = complex(alpha), complex(beta)
    if beta == 0:
        raise ZeroDivisionError("beta = 0: use gaussian_saddle_factor(2 alpha)")
    if alpha == 0:
        i_from, i_to = _cubic_valleys(alpha, beta)
        r = (3 * beta) ** (1.0 / 3.0)
        return _airy_contour(i_from, i_to, 0.0) / r
    r = (3 * beta) ** (1.0 / 3.0)
    x = -alpha * alpha / (3 * beta * r)
    if abs(x) > 0.8 * Z_MAX:
        return _cubic_series(alpha, beta)
    i_from, i_to = _cubic_valleys(alpha, beta)
    shift = np.exp(2j * alpha ** 3 / (27 * beta ** 2))
    return shift * _airy_contour(i_from, i_to, x) / r


def _cubic_valleys(alpha, beta):
    """s-valleys (start, end) reached by the descent path through u = 0."""
    r = (3 * beta) ** (1.0 / 3.0)
    uval = (np.pi / 2 - np.angle(beta) + 2 * np.pi * np.arange(3)) / 3
    if alpha == 0:
        # degenerate saddle: continue the real line into the nearest valleys
        d = 1.0
    else:
        d = np.exp(1j * (np.pi / 4 - np.angle(alpha) / 2))
    a_plus = np.angle(d)
    a_minus = np.angle(-d)
    ip = _nearest(uval, a_plus)
    im = _nearest(uval, a_minus)
    sa = _S_VALLEYS
    i_to = _nearest(sa, uval[ip] + np.angle(r))
    i_from = _nearest(sa, uval[im] + np.angle(r))
    return i_from, i_to


def _cubic_series(alpha, beta, nmax=40):
    """Gaussian moments of exp(i beta u^3) around the u = 0 saddle."""
    g = gaussian_saddle_factor(2 * alpha)
    m2 = 1j / (2 * alpha)  # <u^2>
    total = 0j
    term = 1.0 + 0j
    best = np.inf
    for m in range(nmax):
        if m > 0:
            # (i beta)^{2m} <u^{6m}> / (2m)!
            term = term * (1j * beta) ** 2 * m2 ** 3 \
                * (6 * m - 5) * (6 * m - 3) * (6 * m - 1) / ((2 * m - 1) * (2 * m))
        if abs(term) > best:
            break
        best = abs(term)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return g * total
