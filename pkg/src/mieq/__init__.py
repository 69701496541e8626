"""Two-photon scattering by a lossy dielectric sphere from Mie theory."""

from .geometry import ScatteringGeometry, Triad, make_class_A, make_class_B, verify_perfect_interference
from .material import ConstantPermittivity, DrudeLorentz, TabulatedPermittivity, permittivity, wavenumbers
from .mie import MieSet, mie_coefficients, mie_set
from .response import A_coefficient, PolarizedPort, S_coefficient, j_operator, s_coefficient

__version__ = "0.1.0"
