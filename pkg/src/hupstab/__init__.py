"""Numerical verification of sharp stability for the second-order uncertainty principle."""
from .polygauss import DomainError, ParityError, PolyGaussFn, PolyGaussTerm
from .integration import AccuracyError, AccuracyWarning, RadialProfile, mc_fullspace, quad_radial, sphere_area
from .functionals import DeficitReport, EnergyVector, deficits, energies
from .harmonics import SectorComponent, SeparableFn, UnsupportedSectorError, sector_energies
from .manifold import (
    DistanceResult,
    UnsupportedInputError,
    dist_d2_partial,
    dist_grad_norm_matched,
    dist_grad_to_shup,
    dist_l2_to_hup,
    dist_vector_cfhup,
)
from .constants import (
    ConditioningError,
    StabilityEstimate,
    estimate_C,
    estimate_C_N,
    gaussian_quotient,
    k_of_n,
    lower_bound,
    sweep,
)
from .verify import CheckResult, run_identity_suite, run_inequality_suite, sharpness_probe

__version__ = "0.1.0"
