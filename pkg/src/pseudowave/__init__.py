"""WKB pseudomodes and pseudospectra for the damped wave generator.

Library + CLI for building near-eigenfunctions of the first-order-system
generator of u_tt + 2 a(x) u_t = (u_xx - q(x) u) with unbounded damping,
measuring how fast their residual decays along curves in the left complex
half-plane, and cross-checking against a matrix discretization (spectrum
and weighted pseudospectrum scans).
"""

from .gridfn import (GridFunction, GridSpec, cumulative_integral, derivative,
                     l2_norm, sup_norm)
from .profiles import (DampingProfile, PotentialProfile, check_damping,
                       check_potential, custom_damping, custom_potential,
                       eval_deriv, exponential_damping, exponential_potential,
                       logarithmic_damping, logarithmic_potential,
                       monomial_damping, monomial_potential, window_sup,
                       zero_potential)
from .wkb import (BranchCutError, SpectralPoint, WkbPhases, build_phases,
                  principal_sqrt, remainder_rn, remainder_rn_direct, zeta)
from .pseudomode import (BetaCurve, CutoffSpec, PseudomodeAssembly,
                         PseudomodeConfig, assemble, assemble_at_b,
                         build_cutoff, default_beta_curve, default_grid,
                         solve_b, window_half_width)
from .residual import (HypothesisFlags, HypothesisRatios, RateFit,
                       ResidualReport, apply_pencil, check_hypotheses,
                       fit_gaussian_constants, fit_rate, predict_kappas,
                       report_for, residual_ratio, sweep)
from .discretize import (EigenReport, OperatorDiscretization,
                         PseudospectrumGrid, ScanRect, build_operator,
                         interpolate_to_operator, pseudospectrum_scan,
                         residual_quotient, sigma_min_weighted, spectrum,
                         weighted_norm)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
