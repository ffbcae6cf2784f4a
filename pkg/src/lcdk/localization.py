"""Discrete localization: maximize convex functionals over reference-log-concave
laws on [M, N] with ``E[h(X)] >= 0`` by searching log-affine laws.

Candidates are kept as rows of a pmf matrix over the working window so that
functionals are evaluated in one vectorized pass.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULTS
from .sequences import (
    COUNTING, FLUSH, IntegerInterval, LogAffineSpec, PreconditionError,
    ReferenceMeasure, Sequence, sample_log_concave,
)

ROOT_TOL = 1e-12
FEASIBILITY_TOL = 1e-12


class InfeasibleError(ValueError):
    """No log-concave law on the window satisfies the constraint."""


@dataclass(frozen=True)
class LinearConstraint:
    """``h`` on the working interval; the constraint is ``E[h(X)] >= 0``."""

    interval: IntegerInterval
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.interval):
            raise ValueError("constraint must be defined on the whole interval")

    def array(self) -> np.ndarray:
        return np.array(self.values)

    @classmethod
    def mean_at_most(cls, c: float, M: int, N: int) -> "LinearConstraint":
        """``E[X] <= c`` written as ``E[c - X] >= 0``."""
        return cls(IntegerInterval(M, N), tuple(c - n for n in range(M, N + 1)))

    @classmethod
    def constant(cls, value: float, M: int, N: int) -> "LinearConstraint":
        return cls(IntegerInterval(M, N), (value,) * (N - M + 1))


Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConvexFunctional:
    """``evaluator(P, xs)`` maps a (batch, n) matrix of pmfs on points ``xs``
    to a (batch,) array of values.  Convexity is the caller's claim."""

    name: str
    evaluator: Evaluator = field(repr=False, compare=False)
    declared_convex: bool = True

    def evaluate(self, P: np.ndarray, xs: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.atleast_2d(P), xs), dtype=float)

    def __call__(self, mu: Sequence) -> float:
        return float(self.evaluate(mu.array()[None, :], mu.interval.points())[0])


def tail_functional(t: float) -> ConvexFunctional:
    """``P(X > t)``."""
    return ConvexFunctional(f"tail:{t}", lambda P, xs: P[:, xs > t].sum(axis=1))


def upper_tail_functional(t: float) -> ConvexFunctional:
    """``P(X >= t)``."""
    return ConvexFunctional(f"upper-tail:{t}", lambda P, xs: P[:, xs >= t].sum(axis=1))


def moment_functional(r: float) -> ConvexFunctional:
    def ev(P, xs):
        if not float(r).is_integer() and xs.min() < 0:
            raise PreconditionError("non-integer moment needs nonnegative support")
        return P @ (xs.astype(float) ** r)
    return ConvexFunctional(f"moment:{r}", ev)


def table_functional(values, lo: int = 0) -> ConvexFunctional:
    """``E[g(X)]`` for a table ``g`` given from ``lo`` (zero elsewhere)."""
    g = np.asarray(values, dtype=float)

    def ev(P, xs):
        idx = xs - lo
        inside = (idx >= 0) & (idx < len(g))
        col = np.zeros(len(xs))
        col[inside] = g[idx[inside]]
        return P @ col
    return ConvexFunctional("table", ev)


def neg_entropy_functional() -> ConvexFunctional:
    """``sum p log p``."""
    def ev(P, xs):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
        return terms.sum(axis=1)
    return ConvexFunctional("neg-entropy", ev)


def squared_mean_functional() -> ConvexFunctional:
    return ConvexFunctional("squared-mean", lambda P, xs: (P @ xs.astype(float)) ** 2)


def check_convexity(phi: ConvexFunctional, window: IntegerInterval, reference: ReferenceMeasure,
                    trials: int = 32, seed: int = 0, tol: float = 1e-9) -> bool:
    """Spot-check ``phi`` on random mixtures; warns and returns False on a violation."""
    rng = np.random.default_rng(seed)
    xs = window.points()
    mu = sample_log_concave(rng, window, reference, trials)
    nu = sample_log_concave(rng, window, reference, trials)
    lam = rng.uniform(0, 1, size=(trials, 1))
    mix = phi.evaluate(lam * mu + (1 - lam) * nu, xs)
    chord = lam[:, 0] * phi.evaluate(mu, xs) + (1 - lam[:, 0]) * phi.evaluate(nu, xs)
    ok = bool(np.all(mix <= chord + tol * np.maximum(1.0, np.abs(chord))))
    if not ok:
        warnings.warn(f"functional {phi.name} failed a convexity spot-check", RuntimeWarning)
    return ok


# ---------------------------------------------------------------------------
# candidate family


def default_log_p_grid(points: int | None = None, span: tuple[float, float] | None = None) -> np.ndarray:
    points = points or DEFAULTS.grid_points
    lo, hi = span or DEFAULTS.log_p_span
    return np.linspace(lo, hi, points)


def log_affine_rows(ks: np.ndarray, ls: np.ndarray, log_ps: np.ndarray, window: IntegerInterval,
                    log_q: np.ndarray) -> np.ndarray:
    """Normalized pmfs ``∝ p^n q(n) 1[k, l](n)`` over ``window``, one per row."""
    xs = window.points()
    logw = log_ps[:, None] * xs[None, :] + log_q[None, :]
    inside = (xs[None, :] >= ks[:, None]) & (xs[None, :] <= ls[:, None])
    logw = np.where(inside, logw, -np.inf)
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    w[w < FLUSH] = 0.0
    return w / w.sum(axis=1, keepdims=True)


@dataclass
class CandidateTable:
    """Log-affine candidates as parallel arrays; ``kind`` is point/root/grid."""

    window: IntegerInterval
    reference: ReferenceMeasure
    ks: np.ndarray
    ls: np.ndarray
    log_ps: np.ndarray
    kinds: np.ndarray
    pmfs: np.ndarray
    constraint_values: np.ndarray

    def __len__(self):
        return len(self.ks)

    def spec(self, i: int) -> LogAffineSpec:
        return LogAffineSpec.normalized(float(self.log_ps[i]), int(self.ks[i]), int(self.ls[i]),
                                        self.reference)

    def specs(self) -> list[LogAffineSpec]:
        return [self.spec(i) for i in range(len(self))]


def support_pairs(M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    k, l = np.triu_indices(N - M + 1, 1)
    return k + M, l + M


def log_affine_family(window: IntegerInterval, reference: ReferenceMeasure = COUNTING,
                      log_p_grid: np.ndarray | None = None) -> CandidateTable:
    """Every point mass plus every (support pair, grid ratio) log-affine law."""
    if not reference.covers(window):
        raise PreconditionError("window outside the reference support")
    grid = default_log_p_grid() if log_p_grid is None else np.asarray(log_p_grid, dtype=float)
    log_q = reference.log_masses(window)
    pk, pl = support_pairs(window.lo, window.hi)
    pts = window.points()
    ks = np.concatenate([pts, np.repeat(pk, len(grid))])
    ls = np.concatenate([pts, np.repeat(pl, len(grid))])
    lps = np.concatenate([np.zeros(len(pts)), np.tile(grid, len(pk))])
    kinds = np.array(["point"] * len(pts) + ["grid"] * (len(ks) - len(pts)), dtype=object)
    pmfs = log_affine_rows(ks, ls, lps, window, log_q)
    return CandidateTable(window, reference, ks, ls, lps, kinds, pmfs, np.zeros(len(ks)))


def _bisect_roots(kb: np.ndarray, lb: np.ndarray, lo: np.ndarray, hi: np.ndarray, f_lo: np.ndarray,
                  window: IntegerInterval, log_q: np.ndarray, h: np.ndarray, iters: int = 200):
    """Vectorized bisection of ``E_p[h]`` on every bracket simultaneously."""
    lo, hi, f_lo = lo.copy(), hi.copy(), f_lo.copy()
    mid = 0.5 * (lo + hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = log_affine_rows(kb, lb, mid, window, log_q) @ h
        done = np.abs(val) <= ROOT_TOL
        if done.all():
            break
        same = np.sign(val) == np.sign(f_lo)
        lo = np.where(~done & same, mid, lo)
        f_lo = np.where(~done & same, val, f_lo)
        hi = np.where(~done & ~same, mid, hi)
        lo = np.where(done, mid, lo)
        hi = np.where(done, mid, hi)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def candidate_table(h: LinearConstraint, M: int, N: int, reference: ReferenceMeasure = COUNTING,
                    log_p_grid: np.ndarray | None = None) -> CandidateTable:
    window = IntegerInterval(M, N)
    if h.interval != window:
        raise PreconditionError("constraint must be defined on [M, N]")
    hv = h.array()
    fam = log_affine_family(window, reference, log_p_grid)
    eh = fam.pmfs @ hv
    n_pts = len(window)
    grid = default_log_p_grid() if log_p_grid is None else np.asarray(log_p_grid, dtype=float)
    G = len(grid)

    # sign changes along the grid, per support pair
    body = eh[n_pts:].reshape(-1, G)
    sgn = np.sign(body)
    change = (sgn[:, :-1] * sgn[:, 1:]) < 0
    pair_idx, j = np.nonzero(change)
    pk, pl = support_pairs(M, N)
    log_q = reference.log_masses(window)
    if len(pair_idx):
        roots = _bisect_roots(pk[pair_idx], pl[pair_idx], grid[j], grid[j + 1], body[pair_idx, j],
                              window, log_q, hv)
        root_pmfs = log_affine_rows(pk[pair_idx], pl[pair_idx], roots, window, log_q)
    else:
        roots = np.zeros(0)
        root_pmfs = np.zeros((0, n_pts))
    root_eh = root_pmfs @ hv

    keep = eh >= 0  # point masses with h(k) >= 0 and slack grid points
    # exact zeros on the grid are roots too
    kinds = fam.kinds.copy()
    kinds[(kinds == "grid") & (eh == 0)] = "root"
    ks = np.concatenate([fam.ks[keep], pk[pair_idx]])
    ls = np.concatenate([fam.ls[keep], pl[pair_idx]])
    lps = np.concatenate([fam.log_ps[keep], roots])
    kinds = np.concatenate([kinds[keep], np.array(["root"] * len(roots), dtype=object)])
    pmfs = np.vstack([fam.pmfs[keep], root_pmfs])
    ehs = np.concatenate([eh[keep], root_eh])
    return CandidateTable(window, reference, ks, ls, lps, kinds, pmfs, ehs)


def enumerate_extremal_candidates(h: LinearConstraint, M: int, N: int,
                                  reference: ReferenceMeasure = COUNTING,
                                  log_p_grid: np.ndarray | None = None) -> list[LogAffineSpec]:
    return candidate_table(h, M, N, reference, log_p_grid).specs()


# ---------------------------------------------------------------------------
# maximization


@dataclass(frozen=True)
class ExtremalSearchResult:
    best_value: float
    best_spec: LogAffineSpec
    constraint_value: float
    candidates_examined: int
    kind: str

    def witness(self) -> Sequence:
        return self.best_spec.materialize()

    def to_json(self) -> dict:
        s = self.best_spec
        return {
            "best_value": self.best_value,
            "constraint_value": self.constraint_value,
            "candidates_examined": self.candidates_examined,
            "kind": self.kind,
            "witness": {"k": s.k, "l": s.l, "log_p": s.log_p, "p": s.p, "log_C": s.log_C},
        }


def _best_index(values: np.ndarray, table: CandidateTable) -> int:
    """Largest value; ties go to the lexicographically smallest (k, l, log p)."""
    best = values.max()
    tied = np.nonzero(values == best)[0]
    order = np.lexsort((table.log_ps[tied], table.ls[tied], table.ks[tied]))
    return int(tied[order[0]])


def maximize_convex(phi: ConvexFunctional, h: LinearConstraint, M: int, N: int,
                    reference: ReferenceMeasure = COUNTING, log_p_grid: np.ndarray | None = None,
                    spot_check: bool = True) -> ExtremalSearchResult:
    if not phi.declared_convex:
        raise PreconditionError(f"functional {phi.name} is not declared convex")
    table = candidate_table(h, M, N, reference, log_p_grid)
    if len(table) == 0:
        raise InfeasibleError("no log-affine law satisfies the constraint")
    if spot_check:
        check_convexity(phi, table.window, reference)
    values = phi.evaluate(table.pmfs, table.window.points())
    i = _best_index(values, table)
    return ExtremalSearchResult(float(values[i]), table.spec(i), float(table.constraint_values[i]),
                                len(table), str(table.kinds[i]))


def brute_force_max(phi: ConvexFunctional, h: LinearConstraint, M: int, N: int,
                    reference: ReferenceMeasure = COUNTING, samples: int = 10_000,
                    seed: int | None = None) -> float:
    """Max of ``phi`` over random feasible log-concave laws; ``-inf`` if none."""
    if samples <= 0:
        return -math.inf
    window = IntegerInterval(M, N)
    rng = np.random.default_rng(DEFAULTS.seed if seed is None else seed)
    P = sample_log_concave(rng, window, reference, samples)
    feasible = P @ h.array() >= 0
    if not feasible.any():
        return -math.inf
    return float(phi.evaluate(P[feasible], window.points()).max())


def lambda_profile(mu: Sequence, h: LinearConstraint) -> np.ndarray:
    """Partial sums ``sum_{n <= x} h(n) p(n)`` over the constraint's interval."""
    p = np.array([float(mu[n]) for n in h.interval])
    return np.cumsum(h.array() * p)


def has_sign_change(profile: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(profile.min() < -tol and profile.max() > tol)


# ---------------------------------------------------------------------------
# checks built on the engine


def tail_extremizer_shape_check(c: float, t: float, M: int, N: int,
                                reference: ReferenceMeasure = COUNTING,
                                log_p_grid: np.ndarray | None = None) -> bool:
    """Maximize ``P(X >= t)`` under ``E[X] <= c``; the witness must start at M."""
    if not M <= c:
        raise InfeasibleError(f"mean bound {c} below the window start {M}")
    if t > N:
        return True
    if not c < t:
        raise PreconditionError("need c < t")
    res = maximize_convex(upper_tail_functional(t), LinearConstraint.mean_at_most(c, M, N), M, N,
                          reference, log_p_grid, spot_check=False)
    return res.best_spec.k == M


def two_constraint_localization_check(f, g, M: int, N: int, reference: ReferenceMeasure = COUNTING,
                                      trials: int = 1000, seed: int | None = None,
                                      log_p_grid: np.ndarray | None = None):
    """If ``sum f nu >= 0`` and ``sum g nu >= 0`` for every log-affine ``nu`` on
    the grid, the same must hold for random log-concave laws."""
    from .report import Tally

    window = IntegerInterval(M, N)
    fv, gv = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    if fv.shape != (len(window),) or gv.shape != (len(window),):
        raise PreconditionError("f and g must be tabulated on [M, N]")
    fam = log_affine_family(window, reference, log_p_grid)
    premise = bool(np.all(np.minimum(fam.pmfs @ fv, fam.pmfs @ gv) >= -FEASIBILITY_TOL))
    seed = DEFAULTS.seed if seed is None else seed
    P = sample_log_concave(np.random.default_rng(seed), window, reference, trials)
    slack = np.minimum(P @ fv, P @ gv)
    tally = Tally("two-constraint-localization", tolerance=FEASIBILITY_TOL)
    tally.add_many(slack, lambda i: {"trial": int(i), "pmf": P[i].tolist()})
    counterexamples = int(np.sum(slack < -FEASIBILITY_TOL)) if premise else 0
    return tally.report(
        ok=counterexamples == 0,
        config={"M": M, "N": N, "trials": trials, "seed": seed},
        extra={"premise_holds": premise, "counterexamples": counterexamples},
    )
