"""Certified delay-margin bounds and controller synthesis for unstable SISO plants.

The bounds come from bounded analytic interpolation: a delay range is
achievable when a Pick matrix, built from an outer weight evaluated at the
plant's unstable poles and zeros, is positive definite.
"""

__version__ = "0.1.0"

from .approx import CoinvariantBasis, MagnitudeApproxResult, approx_weight, reduce_interpolant
from .cases import BenchmarkCase, builtin_cases, get_case
from .errors import *  # noqa: F401,F403
from .margin import (
    MarginQuery,
    MarginReport,
    bound_bisection,
    bound_multi_margin,
    bound_with_constant_shift,
    homotopy_bound,
)
from .outer import OuterEvaluator, eval_outer, interpolation_values
from .pick import InterpolationProblem, build_pick, is_feasible, max_entropy_interpolant
from .rational import Plant, Polynomial, RationalFunction, classify_plant, spectral_factor
from .regions import (
    SimultaneousRegion,
    dist_to_cut,
    dist_to_gain_set,
    dist_to_phase_set,
    dist_to_simultaneous,
)
from .synthesis import ControllerRealization, synthesize, verify_margins
from .weights import WeightFunction, WeightSpec
