from .bessel import BesselDomainError, bessel_j, bessel_j_prime
from .contour import ContourConvergenceError, ContourZeroError, ZeroCount, count_zeros, winding_number
from .radial import (
    DEFAULT_RECT, CScanResult, DispersionFunction, RadialProblem, c_scan, dispersion,
    dispersion_closed_form, ramp_profile, probe_grid, radial_v,
)
from .rk import StepSizeUnderflow
