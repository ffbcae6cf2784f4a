"""Verification toolkit for discrete log-concave sequences.

Sequences and reference measures live in ``sequences``; truncated geometric
closed forms in ``closed_forms``; the log-affine extremal search in
``localization``; inequality checks in ``inequalities`` and ``deviations``;
acceptance-scale sweeps in ``sweeps``.
"""
__version__ = "0.1.0"

from .sequences import (
    COUNTING, IntegerInterval, LogAffineSpec, PreconditionError, ProbSequence, ReferenceMeasure, Sequence,
    convolve, is_log_affine, is_log_concave, is_log_concave_gap_form, is_unimodal, mean, median,
    normalize, random_log_concave,
)
from .closed_forms import (
    TruncGeomParams, normalizing_constant, solve_p_for_mean, trunc_geom_mean, trunc_geom_tail,
)
from .localization import (
    InfeasibleError, LinearConstraint, brute_force_max, enumerate_extremal_candidates, maximize_convex,
)
from .report import VerificationReport

__all__ = [
    "COUNTING", "IntegerInterval", "LogAffineSpec", "PreconditionError", "ProbSequence", "ReferenceMeasure",
    "Sequence", "convolve", "is_log_affine", "is_log_concave", "is_log_concave_gap_form", "is_unimodal",
    "mean", "median", "normalize", "random_log_concave",
    "TruncGeomParams", "normalizing_constant", "solve_p_for_mean", "trunc_geom_mean", "trunc_geom_tail",
    "InfeasibleError", "LinearConstraint", "brute_force_max", "enumerate_extremal_candidates",
    "maximize_convex", "VerificationReport",
]
