"""Tunneling delays of a zero-range atom in a half-cycle pulse: first- and
second-order strong-field amplitudes, saddle points, backpropagation, a 3D
variant and a TDSE oracle."""
__version__ = "0.1.0"

from .model import ModelParams, DerivedParams, derive_params, threshold_field_coulomb
from .amplitudes import AmplitudeSpectrum, direct_amplitude, rescatter_amplitude
from .observables import compute_pmd, momentum_shift, scan_delay, species_scan, wigner_time
