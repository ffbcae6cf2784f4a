"""Closed forms for truncated geometric laws ``C p^n 1[k, l](n)``.

Float evaluation goes through ``log p`` with ``expm1`` so that supports of a
few hundred points neither overflow nor cancel; ``Fraction`` inputs are
evaluated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .sequences import IntegerInterval, ProbSequence, PreconditionError, is_exact

LOG_P_BRACKET = (-60.0, 60.0)
MEAN_TOL = 1e-12


@dataclass(frozen=True)
class TruncGeomParams:
    p: float | Fraction
    k: int
    l: int

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.k > self.l:
            raise ValueError("k must not exceed l")

    @property
    def length(self) -> int:
        return self.l - self.k + 1

    @property
    def exact(self) -> bool:
        return is_exact(self.p)

    def pmf(self) -> ProbSequence:
        """Materialize the law (exactly for rational ``p``)."""
        iv = IntegerInterval(self.k, self.l)
        if self.exact:
            p = Fraction(self.p)
            c = normalizing_constant(self)
            return ProbSequence(iv, tuple(c * p**n for n in iv))
        lp = math.log(self.p)
        log_c = _log_norm_const(lp, self.k, self.length)
        return ProbSequence(iv, tuple(math.exp(log_c + n * lp) for n in iv))


def _log_geom_sum(log_p: float, length: int) -> float:
    """``log sum_{j<length} p^j``."""
    if log_p == 0.0:
        return math.log(length)
    if log_p > 0:
        # factor out the largest term: p^(L-1) * sum (1/p)^j
        return (length - 1) * log_p + _log_geom_sum(-log_p, length)
    return math.log(-math.expm1(length * log_p)) - math.log(-math.expm1(log_p))


def _log_norm_const(log_p: float, k: int, length: int) -> float:
    return -k * log_p - _log_geom_sum(log_p, length)


def normalizing_constant(params: TruncGeomParams):
    """C with ``sum_{n=k}^{l} C p^n = 1``."""
    p, k, L = params.p, params.k, params.length
    if params.exact:
        p = Fraction(p)
        if p == 1:
            return Fraction(1, L)
        return p ** (-k) * (1 - p) / (1 - p**L)
    if p == 1:
        return 1.0 / L
    return math.exp(_log_norm_const(math.log(p), k, L))


def partial_weighted_sum(p, N: int):
    """``sum_{n=0}^{N} n p^n`` in closed form (p != 1)."""
    if p == 1:
        raise ValueError("p = 1: use N(N+1)/2")
    if N < 0:
        raise ValueError("N must be nonnegative")
    if is_exact(p):
        p = Fraction(p)
    return p * (1 - p ** (N + 1)) / (1 - p) ** 2 - (N + 1) * p ** (N + 1) / (1 - p)


def _offset_mean(log_p: float, L: int) -> float:
    """Mean of the law minus k, i.e. ``p/(1-p) - L p^L/(1-p^L)``."""
    if abs(log_p) * L < 0.5 and L <= 100_000:
        # both terms are ~1/|log p| and cancel; sum the L weights directly
        w = [math.exp(j * log_p) for j in range(L)]
        return math.fsum(j * x for j, x in enumerate(w)) / math.fsum(w)
    p_over = 1.0 / math.expm1(-log_p)  # p/(1-p)
    if log_p < 0:
        tail_term = L * math.exp(L * log_p) / -math.expm1(L * log_p)
    else:
        tail_term = -L / -math.expm1(-L * log_p)
    return p_over - tail_term


def trunc_geom_mean(params: TruncGeomParams):
    p, k, l, L = params.p, params.k, params.l, params.length
    if p == 1:
        return Fraction(k) + Fraction(l - k, 2) if params.exact else k + (l - k) / 2
    if params.exact:
        p = Fraction(p)
        return k + p / (1 - p) - L * p**L / (1 - p**L)
    return k + _offset_mean(math.log(p), L)


def trunc_geom_tail(params: TruncGeomParams, t):
    """``P(X > t)``."""
    p, k, l = params.p, params.k, params.l
    one, zero = (Fraction(1), Fraction(0)) if params.exact else (1.0, 0.0)
    if t < k:
        return one
    if t >= l:
        return zero
    ft = math.floor(t)
    if p == 1:
        return Fraction(l - ft, params.length) if params.exact else (l - ft) / params.length
    if params.exact:
        p = Fraction(p)
        return p ** (ft + 1 - k) * (1 - p ** (l - ft)) / (1 - p ** params.length)
    lp = math.log(p)
    # p^(ft+1-k) (1 - p^(l-ft)) / (1 - p^L) = sum_{j=ft+1-k}^{L-1} p^j / sum_{j<L} p^j
    return math.exp((ft + 1 - k) * lp + _log_geom_sum(lp, l - ft) - _log_geom_sum(lp, params.length))


def solve_p_for_mean(k: int, l: int, c: float) -> float:
    """Ratio ``p`` whose truncated geometric law on [k, l] has mean ``c``.

    The mean is nondecreasing in ``p``, so bisection on ``log p`` over
    ``LOG_P_BRACKET`` suffices.  The endpoints are degenerate: ``c == k``
    returns 0.0 and ``c == l`` returns ``math.inf`` (point masses).
    """
    if not k <= c <= l:
        raise PreconditionError(f"mean {c} infeasible on [{k}, {l}]")
    if c == k:
        return 0.0
    if c == l:
        return math.inf
    c = float(c)
    L = l - k + 1
    target = c - k
    tol = MEAN_TOL * max(1.0, abs(c))
    lo, hi = LOG_P_BRACKET
    mid = 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = _offset_mean(mid, L) - target
        if abs(val) <= tol:
            break
        if val < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    return math.exp(mid)
