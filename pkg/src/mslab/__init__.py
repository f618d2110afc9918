"""Numerical laboratory for Mumford-Shah minimizers in the plane."""
from .errors import MSLabError
from .geometry import Disk, JumpSet, circle_crossings, hausdorff_distance, length_in_disk, polyline
from .fields import ScalarField
from .models import CRACKTIP_B, ModelMinimizer
from .pairs import PairView, as_pair
from .energy import EnergyReport, RadialProfile, dirichlet, energy_total, radial_profile
from .diagnostics import classify_point, closeness, excess, mean_flatness
from .identities import (am_identity_residual, boundary_identity_residual, cracktip_factor_solve, dlms_residual,
                         euler_lagrange_residuals, lweak_profile, magic_formula_residual)
from .spectral import (SpectralSolution, ZetaBasis, evolve, three_annuli_check,
                       ventsel_eigenvalues)
from .solver import PhaseFieldSegmenter, PhaseFieldState, at_minimize, diagnose_segmentation, extract_jumpset

__version__ = "0.1.0"
