"""Spacing statistics of n^d * alpha mod 1 and point counts on chain curves."""

from .correlations import (
    CorrelationRequest,
    CorrelationResult,
    Region,
    consecutive_gaps,
    correlation,
    correlation_brute,
    correlation_sandwich,
    distinct_gap_counts,
    fourier_identity_check,
    star_sum_identity,
)
from .diophantine import (
    ApproximantLadder,
    ContinuedFraction,
    LadderSource,
    PowerSequence,
    RationalSource,
    build_ladder,
    cf_convergents,
    diophantine_ratio,
    scaled_distance,
    square_decomposition,
)
from .errors import DomainError, GuardError
from .ffcurves import CurveSpec, groebner_selfcheck, nu, nu_brute, weil_defect, zero_sum_check

__all__ = [
    "ApproximantLadder",
    "ContinuedFraction",
    "CorrelationRequest",
    "CorrelationResult",
    "CurveSpec",
    "DomainError",
    "GuardError",
    "LadderSource",
    "PowerSequence",
    "RationalSource",
    "Region",
    "build_ladder",
    "cf_convergents",
    "consecutive_gaps",
    "correlation",
    "correlation_brute",
    "correlation_sandwich",
    "diophantine_ratio",
    "distinct_gap_counts",
    "fourier_identity_check",
    "groebner_selfcheck",
    "nu",
    "nu_brute",
    "scaled_distance",
    "square_decomposition",
    "star_sum_identity",
    "weil_defect",
    "zero_sum_check",
]
