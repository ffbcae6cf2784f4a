"""Modulus of regularity and the deviation inequalities built on it."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np


from .closed_forms import TruncGeomParams, trunc_geom_mean, trunc_geom_tail
from .config import DEFAULTS
from .inequalities import _powered
from .report import Tally, VerificationReport
from .sequences import (
    IntegerInterval, PreconditionError, ProbSequence, Sequence, as_fraction, is_exact, is_log_concave,
    mean, median_range, moment,
)

SLACK_TOL = DEFAULTS.slack_tol
LN2 = math.log(2.0)

DEFAULT_T_GRID = (1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0)
DEFAULT_EPS_GRID = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


def _tabulate(f, K: IntegerInterval) -> list:
    """Absolute values of ``f`` on K; ``f`` may be a Sequence, a callable or a
    table indexed from ``K.lo``.  Exact inputs stay exact."""
    if isinstance(f, Sequence):
        vals = [f[n] for n in K]
    elif callable(f):
        vals = [f(n) for n in K]
    else:
        vals = list(f)
        if len(vals) != len(K):
            raise PreconditionError("table length must match K")
    return [abs(Fraction(v)) if is_exact(v) else abs(float(v)) for v in vals]


def _scale(eps, vals: list):
    """``eps`` as a Fraction when the table is exact, else as a float."""
    return as_fraction(eps) if all(isinstance(v, Fraction) for v in vals) else float(eps)


def modulus_of_regularity(f, K: IntegerInterval, eps) -> Fraction:
    """``sup_{x != y} |{z in Delta(x, y): |f(z)| <= eps |f(x)|}| / |Delta(x, y)|``.

    For each x the threshold is fixed, so one outward scan per side gives
    every ``Delta(x, y)`` count: O(|K|^2) overall.
    """
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)")
    vals = _tabulate(f, K)
    e = _scale(eps, vals)
    best = Fraction(0)
    n = len(vals)
    for i in range(n):
        thr = e * vals[i]
        for step in (1, -1):
            hits = 0
            j = i + step
            size = 0
            while 0 <= j < n:
                size += 1
                hits += vals[j] <= thr
                if hits * best.denominator > best.numerator * size:
                    best = Fraction(hits, size)
                j += step
    return best


def modulus_of_regularity_naive(f, K: IntegerInterval, eps) -> Fraction:
    """Straight transcription of the definition, O(|K|^3); oracle for tests."""
    vals = _tabulate(f, K)
    e = _scale(eps, vals)
    pts = list(K)
    best = Fraction(0)
    for x in pts:
        for y in pts:
            if x == y:
                continue
            delta = range(y, x) if y < x else range(x + 1, y + 1)
            hits = sum(1 for z in delta if vals[z - K.lo] <= e * vals[x - K.lo])
            best = max(best, Fraction(hits, len(delta)))
    return best


def _mass(mu: ProbSequence, K: IntegerInterval, vals: list, pred: Callable) -> float:
    return math.fsum(float(mu[n]) for n, v in zip(K, vals) if pred(v))


def functional_dilation_check(mu: ProbSequence, f, lam, eps, K: IntegerInterval | None = None,
                              check_hypotheses: bool = True, tol: float = SLACK_TOL) -> VerificationReport:
    """``mu(|f| > lam eps) >= mu(|f| >= lam)^delta`` with ``delta = delta_f(eps)``."""
    K = K or mu.interval
    if not K.contains_interval(IntegerInterval(*_support_bounds(mu))):
        raise PreconditionError("mu must be supported on K")
    if check_hypotheses and not is_log_concave(mu):
        raise PreconditionError("mu must be log-concave")
    if not lam > 0:
        raise PreconditionError("lambda must be positive")
    vals = _tabulate(f, K)
    d = modulus_of_regularity(vals, K, eps)
    hi_level = _scale(lam, vals)
    lo_level = hi_level * _scale(eps, vals)
    lhs = _mass(mu, K, vals, lambda v: v > lo_level)
    rhs = _powered(_mass(mu, K, vals, lambda v: v >= hi_level), float(d))
    tally = Tally("functional-dilation", tol)
    tally.add(lhs - rhs, {"lambda": str(lam), "eps": str(eps), "delta": d})
    return tally.report(config={"K": [K.lo, K.hi], "lambda": float(lam), "eps": float(eps)},
                        extra={"delta": d})


def _support_bounds(mu: Sequence) -> tuple[int, int]:
    s = mu.support()
    if not s:
        raise PreconditionError("empty support")
    return s[0], s[-1]


def abs_median_range(mu: ProbSequence, vals: list, K: IntegerInterval) -> tuple:
    """Smallest and largest median of ``|f|`` under ``mu``; both are values of
    ``|f|`` on the support.  Masses are compared exactly."""
    weights: dict = {}
    for n, v in zip(K, vals):
        if mu[n] > 0:
            weights[v] = weights.get(v, Fraction(0)) + Fraction(mu[n])
    total = sum(weights.values(), Fraction(0))
    below = Fraction(0)
    meds = []
    for lev in sorted(weights):
        at_or_above = total - below
        below += weights[lev]
        if 2 * below >= total and 2 * at_or_above >= total:
            meds.append(lev)
    return meds[0], meds[-1]


def large_deviation_bound(d) -> float:
    """``2^{-1/delta}``; 0 when delta = 0."""
    return 0.0 if d == 0 else 2.0 ** (-1.0 / float(d))


def small_deviation_bound(d) -> float:
    return 1.0 - 2.0 ** (-float(d))


def median_deviation_checks(mu: ProbSequence, f, t_grid: Iterable = DEFAULT_T_GRID,
                            eps_grid: Iterable = DEFAULT_EPS_GRID, K: IntegerInterval | None = None,
                            tol: float = SLACK_TOL) -> VerificationReport:
    """``mu(|f| >= m t) <= 2^{-1/delta_f(1/t)}`` for t > 1 and
    ``mu(|f| <= m eps) <= 1 - 2^{-delta_f(eps)} <= delta_f(eps) ln 2``.

    The left sides are monotone in the median m, so checking the smallest
    median (large deviation) and the largest (small deviation) covers all.
    """
    K = K or mu.interval
    vals = _tabulate(f, K)
    m_lo, m_hi = abs_median_range(mu, vals, K)
    if m_hi == 0:
        raise PreconditionError("median of |f| is 0")
    m_large = m_lo if m_lo > 0 else m_hi
    tally = Tally("median-deviation", tol)
    for t in t_grid:
        if not t > 1:
            raise PreconditionError("t must exceed 1")
        d = modulus_of_regularity(vals, K, 1 / as_fraction(t) if isinstance(m_large, Fraction) else 1.0 / t)
        level = m_large * (as_fraction(t) if isinstance(m_large, Fraction) else t)
        lhs = _mass(mu, K, vals, lambda v: v >= level)
        tally.add(large_deviation_bound(d) - lhs, {"kind": "large", "t": t, "median": m_large, "delta": d})
    for eps in eps_grid:
        d = modulus_of_regularity(vals, K, eps)
        level = m_hi * _scale(eps, vals)
        lhs = _mass(mu, K, vals, lambda v: v <= level)
        tally.add(small_deviation_bound(d) - lhs, {"kind": "small", "eps": eps, "median": m_hi, "delta": d})
        tally.add(float(d) * LN2 - small_deviation_bound(d), {"kind": "small-linear", "eps": eps, "delta": d})
    return tally.report(config={"K": [K.lo, K.hi], "t_grid": list(t_grid), "eps_grid": list(eps_grid)},
                        extra={"median_range": [m_lo, m_hi]})


def _law(mu) -> ProbSequence:
    return mu.pmf() if isinstance(mu, TruncGeomParams) else mu


def _survival(law: ProbSequence) -> Callable[[int], float]:
    """``n -> P(X > n)`` for integer n, from one reverse cumulative sum."""
    lo, hi = law.lo, law.hi
    vals = np.array([float(v) for v in law.values])
    surv = np.concatenate([np.cumsum(vals[::-1])[::-1][1:], [0.0]])  # surv[i] = P(X > lo + i)
    total = float(np.sum(vals))

    def S(n: int) -> float:
        if n < lo:
            return total
        if n >= hi:
            return 0.0
        return float(surv[n - lo])
    return S


def identity_deviation_checks(mu, t_grid: Iterable = DEFAULT_T_GRID, eps_grid: Iterable = DEFAULT_EPS_GRID,
                              tol: float = SLACK_TOL) -> VerificationReport:
    """Deviation bounds for X ~ mu about its median.

    On N \\ {0}: ``P(X > Med t) <= e^{-t ln2 / 2}`` and ``P(X <= Med eps) <= 2 ln2 eps``.
    On N: ``P(X >= u) <= e^{-u ln2 / (2 (1 + Med))}`` for ``u > Med``.  For
    ``0 < u <= Med`` the bound can fail (the point mass at 1 with u = 1), so
    that range is reported in ``extra`` but not counted.
    Besides the grids, every jump point of the left sides is checked
    (``t = n/Med``, ``eps = n/Med``, integer ``u``), where the gap is smallest.
    """
    law = _law(mu)
    lo, hi = _support_bounds(law)
    if lo < 0:
        raise PreconditionError("support must lie in N")
    med_lo, med_hi = median_range(law)
    S = _survival(law)
    tally = Tally("identity-deviation", tol)
    skipped = []
    if lo >= 1:
        # P(X > Med t) and P(X <= Med eps) only move at Med t, Med eps in Z
        ts = {as_fraction(t) for t in t_grid} | {Fraction(n, med_lo) for n in range(lo, hi + 1)}
        for t in sorted(t for t in ts if t > 1):
            lhs = S(math.floor(med_lo * t))
            tally.add(math.exp(-float(t) * LN2 / 2) - lhs, {"kind": "median-large", "t": t, "median": med_lo})
        es = {as_fraction(e) for e in eps_grid} | {Fraction(n, med_hi) for n in range(lo, hi + 1)}
        for e in sorted(e for e in es if 0 < e < 1):
            lhs = 1.0 - S(math.floor(med_hi * e))
            tally.add(2 * LN2 * float(e) - lhs, {"kind": "median-small", "eps": e, "median": med_hi})
    else:
        skipped.append("median-large/median-small: 0 in support")
    low_u_worst = math.inf
    for u in range(0, hi + 2):
        gap = median_u_bound(u, med_lo) - S(u - 1)  # P(X >= u)
        if u > med_lo or u == 0:
            tally.add(gap, {"kind": "median-u", "u": u, "median": med_lo})
        else:
            low_u_worst = min(low_u_worst, gap)
    return tally.report(config={"support": [lo, hi]},
                        extra={"median_range": [med_lo, med_hi], "skipped": skipped,
                               "small_u_worst_slack": low_u_worst})


def median_u_bound(u, med) -> float:
    """``e^{-u ln2 / (2 (1 + Med))}``."""
    return math.exp(-float(u) * LN2 / (2 * (1 + med)))


def mean_deviation_bound(t, c) -> float:
    """``e * exp(-2t / (5(c + 1)))``."""
    return math.e * math.exp(-2.0 * float(t) / (5.0 * (float(c) + 1.0)))


def mean_deviation_check(mu, t_grid: Iterable | None = None, tol: float = SLACK_TOL) -> VerificationReport:
    """``P(X > t) <= e exp(-2t / (5(E X + 1)))``; truncated geometric inputs
    use the closed-form mean and tail.  Integer t are always included since
    the tail is constant on ``[n, n + 1)`` while the bound decreases."""
    if isinstance(mu, TruncGeomParams):
        if mu.k < 0:
            raise PreconditionError("support must lie in N")
        c = trunc_geom_mean(mu)
        hi = mu.l
        tail_at = lambda t: trunc_geom_tail(mu, t)
        desc = {"p": mu.p, "k": mu.k, "l": mu.l}
    else:
        lo, hi = _support_bounds(mu)
        if lo < 0:
            raise PreconditionError("support must lie in N")
        c = mean(mu)
        S = _survival(mu)
        tail_at = lambda t: S(math.floor(t))
        desc = {"support": [lo, hi]}
    ts = sorted({float(t) for t in (t_grid or ())} | set(range(0, hi + 1)))
    tally = Tally("mean-deviation", tol)
    for t in ts:
        tally.add(mean_deviation_bound(t, c) - float(tail_at(t)), {**desc, "t": t})
    return tally.report(config=desc, extra={"mean": float(c)})


def reverse_jensen_bound(mr: float, r: float, s: float) -> float:
    """``5 s (s e)^{1/s} (E[X^r]^{1/r} + 1) / 2`` given ``mr = E[X^r]``."""
    return 5.0 * s * (s * math.e) ** (1.0 / s) * (mr ** (1.0 / r) + 1.0) / 2.0


def reverse_jensen_check(mu, r: float, s: float, tol: float = SLACK_TOL) -> VerificationReport:
    if not 1 <= r <= s:
        raise PreconditionError("need 1 <= r <= s")
    law = _law(mu)
    lo, hi = _support_bounds(law)
    if lo < 0:
        raise PreconditionError("support must lie in N")
    if law.backend == "rational":
        ms, mr = float(moment(law, s)), float(moment(law, r))
    else:
        ns = np.arange(law.lo, law.hi + 1, dtype=float)
        w = np.array(law.values, dtype=float)
        ms, mr = float(np.dot(ns**s, w)), float(np.dot(ns**r, w))
    lhs = ms ** (1.0 / s)
    rhs = reverse_jensen_bound(mr, r, s)
    tally = Tally("reverse-jensen", tol)
    tally.add(rhs - lhs, {"r": r, "s": s, "support": [lo, hi]})
    return tally.report(config={"r": r, "s": s}, extra={"lhs": lhs, "rhs": rhs})
