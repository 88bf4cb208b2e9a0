"""Explicit nonuniform Berry-Esseen constants C(t) for t >= 3.18."""

from .bound import (
    NONUNIFORM_CONSTANT,
    UNIFORM_CONSTANT,
    BoundParams,
    BoundResult,
    CenterQuantities,
    FeasibilityReport,
    InfeasibleError,
    center_quantities,
    check_feasibility,
    compute_bounds,
    evaluate,
    gamma,
)
from .optimizer import (
    NoFeasibleCandidate,
    OptimizationResult,
    TableRow,
    bound_function,
    make_table,
    optimal_c,
    optimize,
)
from .ranges import T_MIN, ParamRanges, param_ranges
from .truncation import MomentEnvelope, TruncationInput, moment_envelope, psi_split
from .verifier import (
    DiscreteDistribution,
    VerificationReport,
    ci_bound,
    ci_terms,
    convolve,
    exact_convolution_cdf,
    monte_carlo_cdf,
    normal_cdf_complement,
    verify_bound,
)

__all__ = [
    "NONUNIFORM_CONSTANT", "UNIFORM_CONSTANT", "T_MIN",
    "BoundParams", "BoundResult", "CenterQuantities", "FeasibilityReport", "InfeasibleError",
    "center_quantities", "check_feasibility", "compute_bounds", "evaluate", "gamma",
    "NoFeasibleCandidate", "OptimizationResult", "TableRow",
    "bound_function", "make_table", "optimal_c", "optimize",
    "ParamRanges", "param_ranges",
    "MomentEnvelope", "TruncationInput", "moment_envelope", "psi_split",
    "DiscreteDistribution", "VerificationReport", "ci_bound", "ci_terms", "convolve",
    "exact_convolution_cdf", "monte_carlo_cdf", "normal_cdf_complement", "verify_bound",
]
