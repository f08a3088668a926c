"""Independent 1D TDSE oracle.

The zero-range well is replaced by a narrow Gaussian V(x) = -v0 exp(-x^2/(2 sigma^2))
whose depth is tuned so that the single bound state sits at -kappa^2/2.  The
wavefunction is propagated from -t_f to t_f in the length gauge with the
second-order split-step method (half potential step, full kinetic step in
momentum space, half potential step).  There is no absorber: the grid is made
large enough to hold the whole packet.

After the pulse A(t_f) = 0, so the momentum distribution of the continuum
part of psi(t_f) is the final drift-momentum distribution.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.optimize import brentq

from .model import ModelParams, electric_field, vector_potential

CALIBRATION_TOL = 1e-4
NORM_TOL = 1e-6
EDGE_FRACTION = 0.05
EDGE_THRESHOLD = 1e-6


class CalibrationError(RuntimeError):
    pass


class GridTooSmallError(RuntimeError):
    pass


class InsufficientSignalError(RuntimeError):
    pass


class GridConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    L: float = 700.0
    dx: float = 0.05
    dt: float = 0.005
    sigma: float = 0.1
    v0: float = None

    def validate(self, params=None):
        if self.L < 600:
            raise GridConfigError(f"half width L = {self.L} < 600")
        if self.dx > 0.05 or self.dx <= 0:
            raise GridConfigError(f"dx = {self.dx} outside (0, 0.05]")
        if self.dt > 0.005 or self.dt <= 0:
            raise GridConfigError(f"dt = {self.dt} outside (0, 0.005]")
        if self.sigma > 0.2 or self.sigma <= 0:
            raise GridConfigError(f"sigma = {self.sigma} outside (0, 0.2]")
        if params is not None:
            a0 = abs(vector_potential(0.0, params))
            if np.pi / self.dx < 3 * a0:
                raise GridConfigError(f"momentum Nyquist pi/dx = {np.pi / self.dx:.4g} "
                                      f"< 3 |A(0)| = {3 * a0:.4g}")
        return self

    @property
    def n(self):
        return int(round(2 * self.L / self.dx))

    def x(self):
        return -self.L + self.dx * np.arange(self.n)

    def k(self):
        return 2 * np.pi * sfft.fftfreq(self.n, self.dx)


@dataclass
class TdseResult:
    x: np.ndarray
    psi: np.ndarray
    p: np.ndarray
    pmd: np.ndarray
    times: np.ndarray
    norm_history: np.ndarray
    ground_state: np.ndarray
    bound_population: float
    ionized_fraction: float
    config: GridConfig
    params: ModelParams = None
    extras: dict = field(default_factory=dict)

    @property
    def norm_drift(self):
        return float(np.max(np.abs(self.norm_history - self.norm_history[0])))


def potential(x, sigma, v0):
    return -v0 * np.exp(-x * x / (2 * sigma * sigma))


def _fft(a):
    return sfft.fft(a, workers=-1)


def _ifft(a):
    return sfft.ifft(a, workers=-1)


def _energy(psi, V, k, dx):
    hpsi = _ifft(0.5 * k * k * _fft(psi)) + V * psi
    return float(np.real(np.vdot(psi, hpsi)) * dx / (np.vdot(psi, psi).real * dx))


def relax_ground_state(x, V, dx, kappa=1.0, dtau=0.01, steps=4000):
    """Imaginary-time split-step relaxation; returns (psi, energy)."""
    k = 2 * np.pi * sfft.fftfreq(len(x), dx)
    psi = np.exp(-kappa * np.abs(x)).astype(complex)
    eK = np.exp(-0.5 * k * k * dtau)
    eV = np.exp(-0.5 * V * dtau)
    for _ in range(steps):
        psi = eV * _ifft(eK * _fft(eV * psi))
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    psi = psi * np.exp(-1j * np.angle(psi[len(psi) // 2]))
    return psi, _energy(psi, V, k, dx)


def _calibration_grid(dx, half_width=60.0):
    n = int(round(2 * half_width / dx))
    return -half_width + dx * np.arange(n)


def calibrate_potential(kappa, sigma, dx=0.05, tol=CALIBRATION_TOL):
    """Depth v0 with ground energy -kappa^2/2 for the Gaussian well on a grid of spacing dx."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = _calibration_grid(dx, max(60.0, 30.0 / kappa))
    target = -0.5 * kappa ** 2

    def resid(v0):
        return relax_ground_state(x, potential(x, sigma, v0), dx, kappa)[1] - target

    v_delta = kappa / (sigma * np.sqrt(2 * np.pi))
    try:
        v0 = brentq(resid, 0.5 * v_delta, 4.0 * v_delta, xtol=1e-10 * v_delta)
    except ValueError as exc:
        raise CalibrationError(f"no bracketing depth for kappa={kappa}, sigma={sigma}") from exc
    r = resid(v0)
    if abs(r) > tol:
        raise CalibrationError(f"calibrated energy off by {r:.3g}")
    return v0


def ground_state(config, kappa):
    """Relaxed ground state of the calibrated well, embedded in the full grid."""
    v0 = config.v0 if config.v0 is not None else calibrate_potential(kappa, config.sigma, config.dx)
    hw = max(60.0, 30.0 / kappa)
    xs = _calibration_grid(config.dx, hw)
    psi_s, energy = relax_ground_state(xs, potential(xs, config.sigma, v0), config.dx, kappa)
    x = config.x()
    psi = np.zeros(len(x), complex)
    i0 = int(round((xs[0] - x[0]) / config.dx))
    psi[i0:i0 + len(xs)] = psi_s
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * config.dx)
    return psi, energy, v0


def project_out(psi, ground, dx):
    """psi minus its component along the (normalised) ground state."""
    c = np.vdot(ground, psi) * dx
    return psi - c * ground


def momentum_distribution(psi, dx):
    """(p, |psi(p)|^2) on the FFT grid, p ascending, unit-preserving normalisation."""
    n = len(psi)
    p = 2 * np.pi * sfft.fftshift(sfft.fftfreq(n, dx))
    # grid starts at -L: the phase factor does not affect |.|^2
    phi = sfft.fftshift(_fft(psi)) * dx / np.sqrt(2 * np.pi)
    return p, np.abs(phi) ** 2


def _edge_weight(psi, dx):
    n = len(psi)
    m = max(1, int(EDGE_FRACTION * n))
    return (np.sum(np.abs(psi[:m]) ** 2) + np.sum(np.abs(psi[-m:]) ** 2)) * dx


def propagate(config, params, psi0=None, with_potential=True, with_field=True,
              record_every=200, check_every=2000):
    """Split-step propagation from -t_f to t_f; returns a TdseResult."""
    config.validate(params)
    x = config.x()
    k = config.k()
    dx = config.dx
    tf = params.t_f
    if with_potential:
        ground, _, v0 = ground_state(config, params.kappa)
        V = potential(x, config.sigma, v0)
        config = GridConfig(config.L, config.dx, config.dt, config.sigma, v0)
    else:
        ground, V = None, np.zeros_like(x)
    psi = (ground if psi0 is None else np.asarray(psi0, complex)).copy()
    nst = int(np.ceil(2 * tf / config.dt))
    dt = 2 * tf / nst
    eK = np.exp(-0.5j * k * k * dt)
    times, norms = [-tf], [np.sum(np.abs(psi) ** 2) * dx]
    for n in range(nst):
        tm = -tf + (n + 0.5) * dt
        Ef = electric_field(tm, params) if with_field else 0.0
        half = np.exp(-0.5j * dt * (V + x * Ef))
        psi = half * _ifft(eK * _fft(half * psi))
        if (n + 1) % record_every == 0 or n == nst - 1:
            times.append(-tf + (n + 1) * dt)
            norms.append(np.sum(np.abs(psi) ** 2) * dx)
        if (n + 1) % check_every == 0 or n == nst - 1:
            edge = _edge_weight(psi, dx)
            if edge > EDGE_THRESHOLD:
                raise GridTooSmallError(
                    f"packet weight {edge:.3g} within {EDGE_FRACTION:.0%} of the boundary "
                    f"at t = {-tf + (n + 1) * dt:.4g}")
    if ground is not None:
        c = np.vdot(ground, psi) * dx
        bound = float(abs(c) ** 2)
    else:
        bound = 0.0
    norm = float(np.sum(np.abs(psi) ** 2) * dx)
    result = TdseResult(x=x, psi=psi, p=None, pmd=None, times=np.array(times),
                        norm_history=np.array(norms), ground_state=ground,
                        bound_population=bound, ionized_fraction=norm - bound,
                        config=config, params=params)
    if ground is not None and result.ionized_fraction >= 1e-6:
        result.p, result.pmd = extract_pmd(result, ground)
    return result


def extract_pmd(result, ground_state):
    """|FT of psi with the ground state projected out|^2 on the FFT grid."""
    if result.ionized_fraction < 1e-6:
        raise InsufficientSignalError(f"ionized fraction {result.ionized_fraction:.3g} < 1e-6")
    cont = project_out(result.psi, ground_state, result.config.dx)
    return momentum_distribution(cont, result.config.dx)


def positive_lobe(p, w):
    sel = p > 0
    return p[sel], w[sel]


def compare_with_sfa(tdse_pmd, sfa_spectrum, window=None, tdse_window=None):
    """Peak shifts of the TDSE and SFA spectra.

    The SFA peak is searched in its usual peak window; the TDSE peak over the
    whole p > 0 lobe (0, E0 t_f) unless tdse_window is given."""
    from .observables import find_peak, momentum_shift
    p, w = tdse_pmd
    params = sfa_spectrum.params
    p0 = -vector_potential(0.0, params)
    tdse_window = (0.0, params.E0 * params.t_f) if tdse_window is None else tdse_window
    dp_tdse = find_peak(p, w, tdse_window) - p0
    dp_sfa = momentum_shift(sfa_spectrum, window)
    return {"delta_p_tdse": float(dp_tdse), "delta_p_sfa": float(dp_sfa),
            "sign_match": bool(np.sign(dp_tdse) == np.sign(dp_sfa)),
            "ratio": float(dp_tdse / dp_sfa) if dp_sfa != 0 else np.inf}


def gaussian_width(x, psi, dx):
    rho = np.abs(psi) ** 2
    n = np.sum(rho) * dx
    m = np.sum(x * rho) * dx / n
    return float(np.sqrt(np.sum((x - m) ** 2 * rho) * dx / n))
