"""detfilter: certified determinant-sign filters with validated error bounds.

The package derives, for small determinant predicates evaluated in b-bit
rounded arithmetic, the exact threshold below which a computed sign cannot
be trusted; implements the resulting two-stage filter (rounded evaluation,
exact integer fallback); provides closed-form upper bounds on how often the
fallback triggers; and ships a Monte Carlo harness that validates every
bound empirically.

Modules:
    dyadic       exact (mantissa, exponent) rationals used by the calculus
    error_model  forward-error calculus over expansion DAGs; thresholds
    exact        arbitrary-precision integer determinant signs
    predicates   the filter cascade over grid points
    bounds       closed-form probability bounds and constants
    montecarlo   sampling, CDF estimation, failure rates, dominance checks
    cli          command-line front end (console script: detfilter)
"""

from .dyadic import Dyadic, pow2_ceil, round_to_bits
from .error_model import (
    EvalScheme,
    PrecisionConfig,
    RoundedBound,
    analyze,
    analyze_inexact_inputs,
    det_expansion_scheme,
    hadamard_cap,
    insphere_expansion_scheme,
    op_count,
    rb_add,
    rb_cap,
    rb_mul,
    threshold_table,
)
from .exact import Sign, exact_det_sign, exact_det_value, lift_insphere
from .predicates import (
    FilterVerdict,
    GridPoint,
    PredicateInstance,
    PredicateKind,
    certify,
    eval_rounded,
    filter_stats,
    insphere,
    whichside,
)

__version__ = "0.1.0"

__all__ = [
    "Dyadic",
    "pow2_ceil",
    "round_to_bits",
    "EvalScheme",
    "PrecisionConfig",
    "RoundedBound",
    "analyze",
    "analyze_inexact_inputs",
    "det_expansion_scheme",
    "insphere_expansion_scheme",
    "hadamard_cap",
    "op_count",
    "rb_add",
    "rb_cap",
    "rb_mul",
    "threshold_table",
    "Sign",
    "exact_det_sign",
    "exact_det_value",
    "lift_insphere",
    "FilterVerdict",
    "GridPoint",
    "PredicateInstance",
    "PredicateKind",
    "certify",
    "eval_rounded",
    "filter_stats",
    "insphere",
    "whichside",
    "__version__",
]
