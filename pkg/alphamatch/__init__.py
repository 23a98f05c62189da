"""alphamatch - Matching intervals and entropy of alpha-continued fractions."""

from .alphamap import (
    AlphaParam,
    Digit,
    OrbitRecord,
    convergents,
    expand,
    expand_alpha,
    expand_alpha_minus_one,
    float_orbit,
    format_coding,
    orbit_matrix,
    parse_coding,
    t_alpha_step,
)
from .cfrac import (
    CFString,
    Interval,
    PeriodicCF,
    cf_expand,
    cf_value,
    compare_expansions,
    conjugate_string,
    interval_for_rational,
    pseudocenter,
    pseudocenter_of_expansions,
)
from .entropy import (
    DensityHistogram,
    EntropyEstimate,
    EstimatorConfig,
    ExtrapolationModel,
    HyperbolaFit,
    RestartPolicy,
    birkhoff_entropy,
    closed_form_entropy,
    density_histogram,
    derivative_check,
    entropy_extrapolate,
    fit_hyperbola,
    fit_windows,
    sigma_profile,
)
from .exactnum import IntMatrix2, QuadSurd, format_surd, mobius_apply, quadratic_roots
from .exceptions import (
    AlphaMatchError,
    ConfigurationError,
    ConjectureCounterexampleError,
    ValidationError,
    VerificationFailedError,
)
from .matching import (
    GroupWord,
    MatchingCandidate,
    MatchingInterval,
    Monotonicity,
    check_conditions,
    cylinder_interval,
    k_from_label,
    scan_candidate,
    solve_matching,
    sqrt3_family,
    star_transform,
    verify_algebraic_matching,
    word_normal_form,
)
from .params import ParameterSet, implies
from .tree import (
    MatchingTree,
    cluster_point,
    coverage,
    doubling_chain,
    generate_tree,
    is_maximal,
)

__all__ = [
    "AlphaMatchError",
    "AlphaParam",
    "CFString",
    "ConfigurationError",
    "ConjectureCounterexampleError",
    "DensityHistogram",
    "Digit",
    "EntropyEstimate",
    "EstimatorConfig",
    "ExtrapolationModel",
    "GroupWord",
    "HyperbolaFit",
    "IntMatrix2",
    "Interval",
    "MatchingCandidate",
    "MatchingInterval",
    "MatchingTree",
    "Monotonicity",
    "OrbitRecord",
    "ParameterSet",
    "PeriodicCF",
    "QuadSurd",
    "RestartPolicy",
    "ValidationError",
    "VerificationFailedError",
    "birkhoff_entropy",
    "cf_expand",
    "cf_value",
    "check_conditions",
    "closed_form_entropy",
    "cluster_point",
    "compare_expansions",
    "conjugate_string",
    "convergents",
    "coverage",
    "cylinder_interval",
    "density_histogram",
    "derivative_check",
    "doubling_chain",
    "entropy_extrapolate",
    "expand",
    "expand_alpha",
    "expand_alpha_minus_one",
    "fit_hyperbola",
    "fit_windows",
    "float_orbit",
    "format_coding",
    "format_surd",
    "generate_tree",
    "implies",
    "interval_for_rational",
    "is_maximal",
    "k_from_label",
    "mobius_apply",
    "orbit_matrix",
    "parse_coding",
    "pseudocenter",
    "pseudocenter_of_expansions",
    "quadratic_roots",
    "scan_candidate",
    "sigma_profile",
    "solve_matching",
    "sqrt3_family",
    "star_transform",
    "t_alpha_step",
    "verify_algebraic_matching",
    "word_normal_form",
]
