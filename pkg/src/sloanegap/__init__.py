"""Occurrence statistics for integer-sequence snapshots.

Builds N(n), the number of times each integer appears in an OEIS
"stripped" export, fits the power-law shape of the cloud, locates the
gap that splits it into an upper and a lower sub-cloud, cross-tabulates
number classes (primes, squares, many-factors) against the split, and
contrasts the whole picture with a synthetic cloud generated from
random arithmetic functions.
"""

__version__ = "0.1.0"

from .analysis import (
    DegenerateX,
    DomainError,
    EnvelopePoint,
    InsufficientData,
    PowerLawFit,
    fit_power_law,
    predict,
    theory_envelope,
)
from .classes import (
    ClassCrossTab,
    ClassFlags,
    ClassRow,
    RangeMismatch,
    cross_tab,
    is_square,
    many_factors_flags,
    omega,
    omega_array,
    proportion_in_A_by_omega,
    sieve,
)
from .gap import (
    EmptyInput,
    GapParams,
    GapPartition,
    RangeError,
    boundary_at,
    classify,
    gap_score,
    limit_value,
    percentile_nearest_rank,
)
from .ingest import (
    MalformedLine,
    OccurrenceTable,
    OversizeTerm,
    SequenceRecord,
    absent_numbers,
    build_counts,
    format_line,
    interesting_numbers,
    iter_stripped,
    load_stripped,
    parse_line,
)
from .synth import (
    ExprNode,
    GapComparison,
    Level,
    SimulationResult,
    compare_gap,
    depth_weights,
    eval_expr,
    sample_function,
    simulate,
    simulated_expression,
)

__all__ = [
    "__version__",
    "absent_numbers",
    "boundary_at",
    "build_counts",
    "classify",
    "compare_gap",
    "cross_tab",
    "depth_weights",
    "eval_expr",
    "fit_power_law",
    "format_line",
    "gap_score",
    "interesting_numbers",
    "is_square",
    "iter_stripped",
    "limit_value",
    "load_stripped",
    "many_factors_flags",
    "omega",
    "omega_array",
    "parse_line",
    "percentile_nearest_rank",
    "predict",
    "proportion_in_A_by_omega",
    "sample_function",
    "sieve",
    "simulate",
    "simulated_expression",
    "theory_envelope",
    "ClassCrossTab",
    "ClassFlags",
    "ClassRow",
    "DegenerateX",
    "DomainError",
    "EmptyInput",
    "EnvelopePoint",
    "ExprNode",
    "GapComparison",
    "GapParams",
    "GapPartition",
    "InsufficientData",
    "Level",
    "MalformedLine",
    "OccurrenceTable",
    "OversizeTerm",
    "PowerLawFit",
    "RangeError",
    "RangeMismatch",
    "SequenceRecord",
    "SimulationResult",
]
