"""shearsep: Monte Carlo verification of particle-pair separation in
random multiscale shear flows driven by shared rough noise.

Layout:
  noise       driving-noise paths (Brownian, fBm, deterministic) and
              path-regularity diagnostics
  fields      the random shear fields, their scale schedules and norms
  flow        Carathéodory ODE integration (exact shear + Euler oracle)
  twopoint    coupled pairs, hit extraction, moment oracles
  analysis    closed-form bounds, KS statistics, quantile coupling
  experiments named desk-scale experiments with structured reports
"""

from . import analysis, fields, flow, noise, twopoint
from .errors import CapacityError, PreconditionError

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "fields",
    "flow",
    "noise",
    "twopoint",
    "CapacityError",
    "PreconditionError",
    "__version__",
]
