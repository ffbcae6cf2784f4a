"""Four Functions, convolution stability, discrete Prekopa-Leindler and
geometric dilation: implementations plus sweep-style verifiers."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

import numpy as np

from .config import DEFAULTS
from .localization import log_affine_family
from .report import Tally, VerificationReport
from .sequences import (
    COUNTING, IntegerInterval, LogAffineSpec, PreconditionError, ProbSequence, ReferenceMeasure,
    Sequence, as_fraction, convolve, is_log_concave, is_unimodal, random_log_concave,
    sample_log_concave,
)

SLACK_TOL = DEFAULTS.slack_tol


def _powered(base: np.ndarray | float, exponent: float):
    """``base ** exponent`` with the convention ``0 ** exponent == 0``."""
    base = np.asarray(base, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(base > 0, np.power(np.where(base > 0, base, 1.0), exponent), 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# four functions


def four_functions_slack(P: np.ndarray, fs: Iterable[np.ndarray], alpha: float, beta: float,
                         eps: float = 1e-300) -> np.ndarray:
    """``a log E f3 + b log E f4 - a log E f1 - b log E f2`` per row of ``P``.

    A vanishing left side holds outright (+inf).  ``E f3`` is shifted by
    ``eps`` so that a vanishing right side gives a large finite negative slack.
    """
    f1, f2, f3, f4 = (np.asarray(f, dtype=float) for f in fs)
    e1, e2, e3, e4 = P @ f1, P @ f2, P @ f3, P @ f4
    with np.errstate(divide="ignore"):
        slack = (alpha * np.log(e3 + eps) + beta * np.log(e4 + eps)
                 - alpha * np.log(e1) - beta * np.log(e2))
    return np.where((e1 <= 0) | (e2 <= 0), np.inf, slack)


def four_functions_check(f1, f2, f3, f4, alpha: float, beta: float,
                         reference: ReferenceMeasure = COUNTING,
                         interval: IntegerInterval | None = None, trials: int = 500,
                         seed: int | None = None, log_p_grid=None, family=None) -> VerificationReport:
    """Test ``E[f1]^a E[f2]^b <= E[f3]^a E[f4]^b`` on the log-affine grid and on
    random log-concave laws.  ``ok`` means the reduction is consistent: if the
    grid passes, every random law passes."""
    fs = [np.asarray(f, dtype=float) for f in (f1, f2, f3, f4)]
    if any((f < 0).any() for f in fs):
        raise PreconditionError("four-functions inputs must be nonnegative")
    if alpha <= 0 or beta <= 0:
        raise PreconditionError("exponents must be positive")
    interval = interval or IntegerInterval(0, len(fs[0]) - 1)
    if any(len(f) != len(interval) for f in fs):
        raise PreconditionError("functions must be tabulated on the interval")
    seed = DEFAULTS.seed if seed is None else seed

    fam = family if family is not None else log_affine_family(interval, reference, log_p_grid)
    grid_slack = four_functions_slack(fam.pmfs, fs, alpha, beta)
    grid_pass = bool(np.all(grid_slack >= -SLACK_TOL))

    P = sample_log_concave(np.random.default_rng(seed), interval, reference, trials)
    slack = four_functions_slack(P, fs, alpha, beta)
    tally = Tally("four-functions", SLACK_TOL)
    tally.add_many(slack, lambda i: {"trial": int(i), "pmf": P[i].tolist()})
    random_pass = tally.passes == tally.count
    return tally.report(
        ok=(not grid_pass) or random_pass,
        config={"alpha": alpha, "beta": beta, "interval": [interval.lo, interval.hi],
                "trials": trials, "seed": seed},
        extra={"log_affine_pass": grid_pass, "log_concave_pass": random_pass,
               "log_affine_worst_slack": float(grid_slack.min())},
    )


def dilation_four_functions(A: Iterable[int], K: IntegerInterval, delta: float):
    """Four-functions instance equivalent to ``mu(A_delta)^delta <= mu(A)``:
    ``f1 = 1_{A_delta}``, ``f2 = 1``, ``f3 = 1``, ``f4 = 1_A``, exponents
    ``(delta, 1)``."""
    A = set(A)
    Ad = dilation_set(A, K, delta)
    ind = lambda S: np.array([1.0 if n in S else 0.0 for n in K])
    one = np.ones(len(K))
    return (ind(Ad), one, one, ind(A)), (float(delta), 1.0)


# ---------------------------------------------------------------------------
# convolution stability


def _random_log_affine(rng: np.random.Generator, window: IntegerInterval, reference: ReferenceMeasure,
                       exact: bool) -> Sequence:
    a, b = sorted(int(x) for x in rng.integers(window.lo, window.hi + 1, size=2))
    if exact:
        p = Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 10)))
        return LogAffineSpec.exact(p, a, b, reference).materialize("rational")
    spec = LogAffineSpec.normalized(float(rng.uniform(-3, 3)), a, b, reference)
    return spec.materialize()


def convolution_stability_reduction_check(reference: ReferenceMeasure = COUNTING, trials: int = 1000,
                                          max_support: int = 25, seed: int | None = None,
                                          backend: str | None = None) -> VerificationReport:
    """Convolve random log-affine pairs and random log-concave pairs and test
    the results for reference-log-concavity.

    For a finite reference window ``[0, W]`` inputs live on ``[0, W // 2]`` so
    the convolution stays inside it.  Slack is 0 for a log-concave output and
    -1 otherwise.
    """
    seed = DEFAULTS.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    if reference.support is None:
        window = IntegerInterval(0, max_support - 1)
    else:
        if reference.support.lo != 0:
            raise PreconditionError("finite reference windows must start at 0")
        window = IntegerInterval(0, min(max_support - 1, reference.support.hi // 2))
    exact = (backend or ("rational" if reference.exact else "float")) == "rational"

    affine, concave = Tally("convolution:log-affine", 0.0), Tally("convolution:log-concave", 0.0)
    for i in range(trials):
        f = _random_log_affine(rng, window, reference, exact)
        g = _random_log_affine(rng, window, reference, exact)
        affine.add(0.0 if is_log_concave(convolve(f, g), reference) else -1.0,
                   {"trial": i, "f": [str(v) for v in f.values], "f_lo": f.lo,
                    "g": [str(v) for v in g.values], "g_lo": g.lo})
        backend_name = "rational" if exact else "float"
        mu = random_log_concave(rng, window, reference, backend_name)
        nu = random_log_concave(rng, window, reference, backend_name)
        concave.add(0.0 if is_log_concave(convolve(mu, nu), reference) else -1.0,
                    {"trial": i, "mu": [str(v) for v in mu.values], "nu": [str(v) for v in nu.values]})
    both = Tally("convolution", 0.0)
    both.merge(affine)
    both.merge(concave)
    affine_ok = affine.passes == affine.count
    concave_ok = concave.passes == concave.count
    return both.report(
        ok=affine_ok == concave_ok if reference.kind != "counting" else affine_ok and concave_ok,
        config={"reference": reference.kind, "trials": trials, "max_support": max_support,
                "seed": seed, "backend": "rational" if exact else "float"},
        extra={"log_affine_closed": affine_ok, "log_concave_closed": concave_ok},
    )


def geometric_series_gap(R, m: int):
    """``(R^{m+1} - 1)^2 - (R^{m+2} - 1)(R^m - 1)``; nonnegative for R > 0."""
    return (R ** (m + 1) - 1) ** 2 - (R ** (m + 2) - 1) * (R**m - 1)


# ---------------------------------------------------------------------------
# sup-convolution and Prekopa-Leindler


def _as_t(t) -> Fraction:
    t = as_fraction(t)
    if not 0 < t < 1:
        raise PreconditionError("t must lie in (0, 1)")
    return t


def sup_convolution(f: Sequence, g: Sequence, t) -> Sequence:
    """``z -> max f(x)^{1-t} g(y)^t`` over ``|(1-t)x + ty - z| < 1``.

    The window test is done in integers: with ``t = a/b``,
    ``|(b-a)x + a y - b z| < b``.
    """
    t = _as_t(t)
    a, b = t.numerator, t.denominator
    lo = math.floor((1 - t) * f.lo + t * g.lo)
    hi = math.ceil((1 - t) * f.hi + t * g.hi)
    out = np.zeros(hi - lo + 1)
    fx = np.array([n for n, v in f.items() if v > 0], dtype=np.int64)
    gy = np.array([n for n, v in g.items() if v > 0], dtype=np.int64)
    if len(fx) and len(gy):
        fv = _powered(np.array([float(f[n]) for n in fx]), float(1 - t))
        gv = _powered(np.array([float(g[n]) for n in gy]), float(t))
        vals = (fv[:, None] * gv[None, :]).ravel()
        num = ((b - a) * fx[:, None] + a * gy[None, :]).ravel()  # = b * w
        z_floor = num // b
        for z in (z_floor, z_floor + 1):
            ok = np.abs(num - b * z) < b
            np.maximum.at(out, z[ok] - lo, vals[ok])
    return Sequence(IntegerInterval(lo, hi), tuple(out.tolist()))


def _integrate(f: Sequence, mu: Sequence) -> float:
    return math.fsum(float(f[n]) * float(v) for n, v in mu.items() if v > 0)


def prekopa_leindler_slack(f: Sequence, g: Sequence, t, mu: Sequence) -> float:
    t = _as_t(t)
    lhs = _integrate(sup_convolution(f, g, t), mu)
    rhs = _powered(_integrate(f, mu), float(1 - t)) * _powered(_integrate(g, mu), float(t))
    return lhs - rhs


def prekopa_leindler_check(f: Sequence, g: Sequence, t, mu: ProbSequence,
                           check_hypotheses: bool = True, tol: float = SLACK_TOL) -> VerificationReport:
    if check_hypotheses:
        if not is_unimodal(f) or not is_unimodal(g):
            raise PreconditionError("f and g must be unimodal")
        if not is_log_concave(mu):
            raise PreconditionError("mu must be log-concave")
    slack = prekopa_leindler_slack(f, g, t, mu)
    tally = Tally("prekopa-leindler", tol)
    tally.add(slack, {"t": str(as_fraction(t))})
    return tally.report(config={"t": str(as_fraction(t))})


def interval_sup_convolution_bounds(a1: int, a2: int, b1: int, b2: int, t) -> tuple[int, int]:
    """Closed form of the sup-convolution of two interval indicators."""
    t = _as_t(t)
    return math.floor((1 - t) * a1 + t * b1), math.ceil((1 - t) * a2 + t * b2)


def random_unimodal(rng: np.random.Generator, interval: IntegerInterval) -> Sequence:
    """Nonnegative unimodal sequence: rises to a random peak then falls, with
    random zero runs at both ends."""
    n = len(interval)
    a, b = sorted(int(x) for x in rng.integers(0, n, size=2))
    peak = int(rng.integers(a, b + 1))
    up = np.cumsum(rng.exponential(1.0, size=peak - a + 1))
    down = up[-1] - np.cumsum(rng.exponential(up[-1] / max(1, b - peak + 1), size=b - peak))
    body = np.concatenate([up, np.maximum(down, 0.0)])
    # zeros inside the rise would break unimodality only if followed by a dip
    vals = np.zeros(n)
    vals[a:b + 1] = body
    if rng.random() < 0.3:
        vals[a:b + 1] = np.round(vals[a:b + 1])
    seq = Sequence(interval, tuple(vals.tolist()))
    return seq if is_unimodal(seq) else Sequence(interval, tuple(np.sort(vals).tolist()))


# ---------------------------------------------------------------------------
# dilation


def _delta_fraction(delta) -> Fraction:
    d = as_fraction(delta)
    if not 0 < d < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    return d


def half_open(x: int, y: int) -> range:
    """``Delta(x, y)``: ``[y, x)`` when ``y <= x``, else ``(x, y]``."""
    return range(y, x) if y <= x else range(x + 1, y + 1)


def dilation_set(A: Iterable[int], K: IntegerInterval, delta) -> set[int]:
    """Points z of A such that every ``Delta(z, y)`` inside K is filled by A to
    a fraction of at least ``1 - delta``.  Prefix sums give O(|K|^2)."""
    A = set(A)
    if not all(a in K for a in A):
        raise PreconditionError("A must be a subset of K")
    d = _delta_fraction(delta)
    num, den = d.numerator, d.denominator
    pts = list(K)
    prefix = [0]
    for n in pts:
        prefix.append(prefix[-1] + (n in A))
    count = lambda lo, hi: prefix[hi - K.lo + 1] - prefix[lo - K.lo]  # |A ∩ [lo, hi]|
    out = set()
    for z in A:
        good = True
        for y in pts:
            if y == z:
                continue
            lo, hi = (y, z - 1) if y < z else (z + 1, y)
            size = hi - lo + 1
            # count >= (1 - delta) size, in integers
            if count(lo, hi) * den < (den - num) * size:
                good = False
                break
        if good:
            out.add(z)
    return out


def dilation_set_all_intervals(A: Iterable[int], K: IntegerInterval, delta) -> set[int]:
    """Same set straight from the definition: every interval containing z."""
    A = set(A)
    d = _delta_fraction(delta)
    out = set()
    for z in A:
        good = True
        for lo in range(K.lo, z + 1):
            for hi in range(z, K.hi + 1):
                size = hi - lo  # |Delta \ {z}|
                hits = sum(1 for n in range(lo, hi + 1) if n != z and n in A)
                if hits < (1 - d) * size:
                    good = False
                    break
            if not good:
                break
        if good:
            out.add(z)
    return out


def dilation_masks(masks: np.ndarray, delta) -> np.ndarray:
    """Vectorized ``dilation_set`` over boolean rows (one subset of K per row)."""
    d = _delta_fraction(delta)
    num, den = d.numerator, d.denominator
    masks = np.asarray(masks, dtype=bool)
    n = masks.shape[1]
    prefix = np.zeros((masks.shape[0], n + 1), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(masks, axis=1)
    out = masks.copy()
    for z in range(n):
        for y in range(n):
            if y == z:
                continue
            lo, hi = (y, z - 1) if y < z else (z + 1, y)
            cnt = prefix[:, hi + 1] - prefix[:, lo]
            out[:, z] &= cnt * den >= (den - num) * (hi - lo + 1)
    return out


def dilation_slack(mu_A, mu_Ad, mu_K, delta: float):
    """``mu(A) - mu(A_delta)^delta mu(K)^(1-delta)`` with ``0^delta = 0``."""
    return mu_A - _powered(mu_Ad, delta) * _powered(mu_K, 1 - delta)


def dilation_check(mu: ProbSequence, A: Iterable[int], K: IntegerInterval, delta,
                   check_hypotheses: bool = True, truncation_mass: float | None = None,
                   tol: float = SLACK_TOL) -> VerificationReport:
    """``mu(A) >= mu(A_delta)^delta mu(K)^(1-delta)``.

    ``truncation_mass`` records the mass lost when ``mu`` stands in for a law
    on an infinite interval (see ``geometric_window``).
    """
    A = set(A)
    if check_hypotheses and not is_log_concave(mu):
        raise PreconditionError("mu must be log-concave")
    Ad = dilation_set(A, K, delta)
    measure = lambda S: math.fsum(float(mu[n]) for n in S)
    slack = dilation_slack(measure(A), measure(Ad), measure(K), float(delta))
    tally = Tally("dilation", tol)
    tally.add(slack, {"A": sorted(A), "A_delta": sorted(Ad), "delta": str(as_fraction(delta))})
    config = {"K": [K.lo, K.hi], "delta": float(delta)}
    if truncation_mass is not None:
        config["truncation_mass"] = truncation_mass
    return tally.report(config=config)


def geometric_window(p: float, lo: int = 0, mass_tol: float = 1e-12) -> tuple[ProbSequence, float]:
    """Geometric law ``∝ p^n`` on ``[lo, inf)`` cut where the lost mass drops
    below ``mass_tol``; returns the renormalized law and the lost mass."""
    if not 0 < p < 1:
        raise PreconditionError("geometric ratio must lie in (0, 1)")
    length = max(1, math.ceil(math.log(mass_tol) / math.log(p)))
    lost = p**length
    vals = [(1 - p) * p**j / (1 - lost) for j in range(length)]
    return ProbSequence(IntegerInterval(lo, lo + length - 1), tuple(vals)), lost


def psi(x: float, delta: float) -> float:
    """``(1 - x)^delta - (1 - x)`` on [0, 1]."""
    if not 0 <= x <= 1 or not 0 < delta < 1:
        raise PreconditionError("psi needs x in [0, 1] and delta in (0, 1)")
    return (1 - x) ** delta - (1 - x)
