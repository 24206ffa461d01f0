"""Convex Tikhonov regularization with heuristic parameter choice.

Minimizes (1/2)||Kx - y||^2 + alpha R(x) for convex penalties R, computes
Bregman-distance error estimates under a source condition, and selects the
regularization parameter by the Hanke-Raus rule, the quasi-optimality
principle or the discrepancy principle.
"""

from .linops import (
    CircularConvolution,
    Composition,
    DenseOperator,
    HaarSynthesis,
    LinearOperator,
    OperatorNormError,
    SeparableBlur,
    compose,
    make_blur,
    make_circular_convolution,
    make_haar_synthesis,
    operator_norm,
    range_complement_ratio,
)
from .penalty import ElasticNet, L1, LpPower, Penalty, Quadratic
from .solver import (
    PathSolveError,
    RegularizationPath,
    SolverOptions,
    TikhonovSolution,
    optimality_gap,
    solve_path,
    solve_tikhonov,
)
from .bregman import (
    ErrorReport,
    ErrorRow,
    Violation,
    bregman_distance,
    build_error_report,
    canonical_xi,
    check_estimates,
    splitting_identity_check,
)
from .rules import (
    RuleSelection,
    autoreg_ratio,
    discrepancy_principle,
    hanke_raus,
    oracle_best,
    quasi_optimality,
)
from .problems import (
    ProblemInstance,
    add_noise,
    blur_problem,
    construct_source_solution,
    deconvolution_problem,
    default_w_profile,
    noise_condition_epsilon,
    shapes_image,
)
from .rng import SplitMix64
from .estimator import TikhonovRegressor

__version__ = "0.1.0"

__all__ = [
    "CircularConvolution",
    "Composition",
    "DenseOperator",
    "ElasticNet",
    "ErrorReport",
    "ErrorRow",
    "HaarSynthesis",
    "L1",
    "LinearOperator",
    "LpPower",
    "OperatorNormError",
    "PathSolveError",
    "Penalty",
    "ProblemInstance",
    "Quadratic",
    "RegularizationPath",
    "RuleSelection",
    "SeparableBlur",
    "SolverOptions",
    "SplitMix64",
    "TikhonovRegressor",
    "TikhonovSolution",
    "Violation",
    "add_noise",
    "autoreg_ratio",
    "blur_problem",
    "bregman_distance",
    "build_error_report",
    "canonical_xi",
    "check_estimates",
    "compose",
    "construct_source_solution",
    "deconvolution_problem",
    "default_w_profile",
    "discrepancy_principle",
    "hanke_raus",
    "make_blur",
    "make_circular_convolution",
    "make_haar_synthesis",
    "noise_condition_epsilon",
    "operator_norm",
    "optimality_gap",
    "oracle_best",
    "quasi_optimality",
    "range_complement_ratio",
    "shapes_image",
    "solve_path",
    "solve_tikhonov",
    "splitting_identity_check",
]
