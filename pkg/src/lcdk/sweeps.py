"""Sweep drivers behind ``lcdk verify``; the acceptance tests call these too.

Each sweep returns one VerificationReport.  Defaults reproduce the full
acceptance scale; every count and grid can be overridden.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .closed_forms import TruncGeomParams
from .config import DEFAULTS
from .deviations import (
    identity_deviation_checks, mean_deviation_check, median_deviation_checks,
    modulus_of_regularity, reverse_jensen_check, functional_dilation_check,
)
from .inequalities import (
    _powered, convolution_stability_reduction_check, dilation_check, dilation_four_functions,
    dilation_masks, dilation_set, four_functions_check, geometric_series_gap, geometric_window,
    interval_sup_convolution_bounds, prekopa_leindler_slack, random_unimodal, sup_convolution,
)
from .localization import log_affine_family
from .report import Tally, VerificationReport, combine_reports
from .sequences import (
    COUNTING, IntegerInterval, ProbSequence, ReferenceMeasure, Sequence, sample_log_concave,
)

SLACK_TOL = DEFAULTS.slack_tol


def _seed(seed):
    return DEFAULTS.seed if seed is None else seed


def geom_grid(ps=None, ks=None, max_len: int | None = None) -> list[TruncGeomParams]:
    """Truncated geometric grid: every p, every k, every length up to max_len + 1."""
    ps = DEFAULTS.geom_ps if ps is None else ps
    ks = DEFAULTS.geom_ks if ks is None else ks
    max_len = DEFAULTS.geom_max_len if max_len is None else max_len
    return [TruncGeomParams(p, k, k + d) for p in ps for k in ks for d in range(max_len + 1)]


def random_laws(n: int, interval: IntegerInterval, seed, reference: ReferenceMeasure = COUNTING) -> list[ProbSequence]:
    P = sample_log_concave(np.random.default_rng(seed), interval, reference, n)
    return [ProbSequence(interval, tuple(row.tolist())) for row in P]


def _subset_masks(n: int, count: int | None, rng: np.random.Generator) -> np.ndarray:
    if count is None:
        return ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
    return rng.random((count, n)) < rng.random((count, 1))


# ---------------------------------------------------------------------------


def sweep_four_functions(interval: IntegerInterval = IntegerInterval(0, 12), subsets: int = 16,
                         deltas=None, trials: int = 500, seed=None) -> VerificationReport:
    """Dilation-type four-functions instances: the log-affine grid and random
    log-concave laws must agree (grid pass implies random pass)."""
    seed = _seed(seed)
    deltas = DEFAULTS.deltas if deltas is None else deltas
    rng = np.random.default_rng(seed)
    family = log_affine_family(interval)
    masks = _subset_masks(len(interval), subsets, rng)
    tally = Tally("four-functions", SLACK_TOL)
    consistent = True
    grid_fail = 0
    for i, mask in enumerate(masks):
        A = {interval.lo + j for j in np.flatnonzero(mask)}
        for d in deltas:
            fs, (a, b) = dilation_four_functions(A, interval, d)
            rep = four_functions_check(*fs, a, b, interval=interval, trials=trials,
                                       seed=seed + i, family=family)
            consistent &= rep.ok
            grid_fail += not rep.extra["log_affine_pass"]
            tally.count += rep.instances_checked
            tally.passes += rep.passes
            if rep.worst_slack < tally.worst:
                tally.worst, tally.witness = rep.worst_slack, {"A": sorted(A), "delta": d, **rep.witness}
    return tally.report(ok=consistent,
                        config={"interval": [interval.lo, interval.hi], "subsets": len(masks),
                                "deltas": list(deltas), "trials": trials, "seed": seed},
                        extra={"log_affine_failures": grid_fail})


def sweep_convolution(reference: ReferenceMeasure = COUNTING, trials: int = 1000, max_support: int = 30,
                      rationals: int = 200, max_m: int = 12, seed=None) -> VerificationReport:
    """Closure under convolution plus the exact geometric-series inequality."""
    seed = _seed(seed)
    closure = convolution_stability_reduction_check(reference, trials, max_support, seed)
    rng = np.random.default_rng(seed + 1)
    gap = Tally("geometric-series-gap", 0.0)
    for _ in range(rationals):
        R = Fraction(int(rng.integers(1, 60)), int(rng.integers(1, 60)))
        for m in range(max_m + 1):
            g = geometric_series_gap(R, m)
            gap.add(0.0 if g >= 0 else -1.0, {"R": R, "m": m})
    return combine_reports("convolution", [closure, gap.report()],
                           config={**closure.config, "rationals": rationals, "max_m": max_m})


def _dilation_slacks(masks: np.ndarray, laws: np.ndarray, delta: float, block: int = 256):
    """Yield ``(slack, law_offset)`` blocks of ``mu(A) - mu(A_d)^d mu(K)^(1-d)``."""
    ad = dilation_masks(masks, delta).astype(float)
    m = masks.astype(float)
    for s in range(0, len(laws), block):
        L = laws[s:s + block]
        muK = L.sum(axis=1)[None, :]
        yield m @ L.T - _powered(ad @ L.T, delta) * _powered(muK, 1 - delta), s


def sweep_dilation(K: IntegerInterval = IntegerInterval(0, 12), deltas=None, random_count: int = 200,
                   subsets: int | None = None, seed=None, truncation_ps=(0.3, 0.5, 0.8),
                   truncation_subsets: int = 200) -> VerificationReport:
    """``mu(A) >= mu(A_d)^d mu(K)^(1-d)`` over subsets of K (all of them unless
    ``subsets`` is given), log-affine laws on every support for 15 ratios, and
    random log-concave laws.  Geometric laws on ``[0, inf)`` are checked on
    finite windows holding all but 1e-12 of the mass."""
    seed = _seed(seed)
    deltas = DEFAULTS.deltas if deltas is None else deltas
    rng = np.random.default_rng(seed)
    n = len(K)
    masks = _subset_masks(n, subsets, rng)
    fam = log_affine_family(K, COUNTING, np.array(DEFAULTS.dilation_log_ps))
    laws = np.vstack([fam.pmfs, sample_log_concave(rng, K, COUNTING, random_count)])
    n_affine = len(fam.pmfs)

    def witness(mask_rows, i_mask, law_rows, i_law, d, lo):
        A = sorted(lo + int(j) for j in np.flatnonzero(mask_rows[i_mask]))
        Ad = sorted(dilation_set(A, IntegerInterval(lo, lo + mask_rows.shape[1] - 1), d))
        return {"A": A, "A_delta": Ad, "delta": d, "law_index": int(i_law),
                "pmf": law_rows[i_law].tolist()}

    tally = Tally("dilation", SLACK_TOL)
    for d in deltas:
        for slack, off in _dilation_slacks(masks, laws, d):
            cols = slack.shape[1]
            tally.add_many(slack, lambda i, off=off, cols=cols, d=d:
                           witness(masks, i // cols, laws, off + i % cols, d, K.lo))

    trunc = Tally("dilation-infinite-window", SLACK_TOL)
    records = []
    for p in truncation_ps:
        law, lost = geometric_window(p, K.lo)
        W = law.interval
        row = np.array(law.values)[None, :]
        tmasks = _subset_masks(len(W), truncation_subsets, rng)
        worst = math.inf
        for d in deltas:
            for slack, _ in _dilation_slacks(tmasks, row, d):
                trunc.add_many(slack, lambda i, d=d, tm=tmasks, row=row, lo=W.lo: witness(tm, i, row, 0, d, lo))
                worst = min(worst, float(slack.min()))
        records.append({"p": p, "window": [W.lo, W.hi], "lost_mass": lost, "worst_slack": worst})
    return combine_reports(
        "dilation", [tally.report(), trunc.report()],
        config={"K": [K.lo, K.hi], "deltas": list(deltas), "subsets": len(masks),
                "log_affine_laws": n_affine, "random_laws": random_count, "seed": seed,
                "truncation_policy": "window mass >= 1 - 1e-12, renormalized"},
        extra={"truncation": records})


def sweep_prekopa_leindler(interval: IntegerInterval = IntegerInterval(0, 25), trials: int = 1000,
                           ts=None, seed=None, indicator_window: IntegerInterval = IntegerInterval(0, 15),
                           indicator_ts=(Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3),
                                         Fraction(3, 4)),
                           geometric_pairs: int = 200) -> VerificationReport:
    """Random unimodal pairs against log-concave laws, exhaustive interval
    indicators against the floor/ceiling closed form, and interval indicators
    under truncated geometric laws."""
    seed = _seed(seed)
    ts = DEFAULTS.pl_ts if ts is None else ts
    rng = np.random.default_rng(seed)
    laws = sample_log_concave(rng, interval, COUNTING, trials)
    rand = Tally("prekopa-leindler", SLACK_TOL)
    for i in range(trials):
        f, g = random_unimodal(rng, interval), random_unimodal(rng, interval)
        mu = ProbSequence(interval, tuple(laws[i].tolist()))
        for t in ts:
            rand.add(prekopa_leindler_slack(f, g, t, mu),
                     {"f": list(f.values), "g": list(g.values), "t": t, "mu": list(mu.values)})

    form = Tally("sup-convolution-interval-form", 0.0)
    pairs = [(a, b) for a in indicator_window for b in indicator_window if a <= b]
    for t in indicator_ts:
        for a1, a2 in pairs:
            f = Sequence(IntegerInterval(a1, a2), (1,) * (a2 - a1 + 1))
            for b1, b2 in pairs:
                g = Sequence(IntegerInterval(b1, b2), (1,) * (b2 - b1 + 1))
                h = sup_convolution(f, g, t)
                L1, L2 = interval_sup_convolution_bounds(a1, a2, b1, b2, t)
                ok = h.lo == L1 and h.hi == L2 and all(v == 1 for v in h.values)
                form.add(0.0 if ok else -1.0, {"a": [a1, a2], "b": [b1, b2], "t": t})

    geo = Tally("prekopa-leindler-geometric", SLACK_TOL)
    W = IntegerInterval(0, 10)
    wpairs = [(a, b) for a in W for b in W if a <= b]
    for p in DEFAULTS.geom_ps:
        mu = TruncGeomParams(p, W.lo, W.hi).pmf()
        for j in rng.choice(len(wpairs) ** 2, size=geometric_pairs, replace=False):
            (a1, a2), (b1, b2) = wpairs[j // len(wpairs)], wpairs[j % len(wpairs)]
            f = Sequence(IntegerInterval(a1, a2), (1,) * (a2 - a1 + 1))
            g = Sequence(IntegerInterval(b1, b2), (1,) * (b2 - b1 + 1))
            for t in ts:
                geo.add(prekopa_leindler_slack(f, g, t, mu), {"p": p, "a": [a1, a2], "b": [b1, b2], "t": t})

    return combine_reports("prekopa-leindler", [rand.report(), form.report(), geo.report()],
                           config={"interval": [interval.lo, interval.hi], "trials": trials,
                                   "ts": list(ts), "seed": seed,
                                   "indicator_window": [indicator_window.lo, indicator_window.hi]})


def sweep_functional_dilation(interval: IntegerInterval = IntegerInterval(0, 20), trials: int = 500,
                              matched: int = 200, seed=None) -> VerificationReport:
    """Random (mu, f, lambda, eps) instances, plus three-valued f matched
    against the geometric dilation check."""
    seed = _seed(seed)
    rng = np.random.default_rng(seed)
    n = len(interval)
    laws = sample_log_concave(rng, interval, COUNTING, trials + matched)
    rand = Tally("functional-dilation", SLACK_TOL)
    for i in range(trials):
        mu = ProbSequence(interval, tuple(laws[i].tolist()))
        if rng.random() < 0.5:
            vals = [int(v) for v in rng.integers(0, 6, size=n)]
        else:
            vals = (rng.exponential(1.0, size=n) * (rng.random(n) < 0.8)).tolist()
        top = max(abs(v) for v in vals) or 1
        scale = Fraction(int(rng.integers(1, 25)), 20)
        lam = scale * top if isinstance(top, int) else float(scale) * top
        eps = Fraction(int(rng.integers(1, 20)), 20)
        rep = functional_dilation_check(mu, vals, lam, eps, check_hypotheses=False)
        rand.add(rep.worst_slack, {"f": vals, "lambda": lam, "eps": eps, "mu": list(mu.values)})

    cross = Tally("functional-vs-geometric", SLACK_TOL)
    eps = Fraction(1, 2)
    for i in range(matched):
        mu = ProbSequence(interval, tuple(laws[trials + i].tolist()))
        in_A = rng.random(n) < rng.uniform(0.5, 1.0)
        A = {interval.lo + j for j in np.flatnonzero(in_A)}
        # C inside a dilation set of A keeps delta_f below 1
        core = dilation_set(A, interval, DEFAULTS.deltas[int(rng.integers(len(DEFAULTS.deltas)))])
        C = {z for z in core if rng.random() < 0.8}
        in_C = [interval.lo + j in C for j in range(n)]
        # values 1 > 3/4 > 1/2 with eps = 1/2: only points off A fall below eps |f(x)|
        vals = [Fraction(1) if c else (Fraction(3, 4) if a else Fraction(1, 2)) for a, c in zip(in_A, in_C)]
        d = modulus_of_regularity(vals, interval, eps)
        func = functional_dilation_check(mu, vals, 1, eps, check_hypotheses=False).worst_slack
        inst = {"A": sorted(A), "C": sorted(C), "delta": d}
        cross.add(func, {"kind": "functional", **inst})
        if 0 < d < 1:
            geo = dilation_check(mu, A, interval, d, check_hypotheses=False).worst_slack
            cross.add(geo, {"kind": "geometric", **inst})
            # superlevel set sits inside A_delta, so the functional slack dominates
            cross.add(0.0 if C <= dilation_set(A, interval, d) else -1.0, {"kind": "inclusion", **inst})
            cross.add(func - geo, {"kind": "dominance", **inst})
    return combine_reports("functional-dilation", [rand.report(), cross.report()],
                           config={"interval": [interval.lo, interval.hi], "trials": trials,
                                   "matched": matched, "seed": seed})


def _tally_reports(name: str, reports, key) -> Tally:
    tally = Tally(name, SLACK_TOL)
    for inst, rep in reports:
        tally.count += rep.instances_checked
        tally.passes += rep.passes
        if rep.worst_slack < tally.worst:
            tally.worst, tally.witness = rep.worst_slack, {key: inst, "instance": rep.witness}
    return tally


def _geom_desc(g: TruncGeomParams) -> dict:
    return {"p": g.p, "k": g.k, "l": g.l}


def sweep_deviations(grid=None, random_count: int = 500, seed=None,
                     median_window: IntegerInterval = IntegerInterval(1, 60)) -> VerificationReport:
    """Median-based deviation bounds: identity checks on the geometric grid and
    random laws, functional checks with f = identity."""
    seed = _seed(seed)
    grid = geom_grid() if grid is None else grid
    geo = _tally_reports("identity-deviation-geometric",
                         ((_geom_desc(g), identity_deviation_checks(g)) for g in grid), "law")
    rand_pos = random_laws(random_count, IntegerInterval(1, 40), seed)
    rand_nat = random_laws(random_count, IntegerInterval(0, 40), seed + 1)
    rnd = _tally_reports("identity-deviation-random",
                         ((list(mu.values), identity_deviation_checks(mu)) for mu in rand_pos + rand_nat), "law")
    med_laws = [TruncGeomParams(p, median_window.lo, median_window.hi).pmf() for p in DEFAULTS.geom_ps]
    med = _tally_reports("median-deviation-identity",
                         ((_geom_desc(TruncGeomParams(p, median_window.lo, median_window.hi)),
                           median_deviation_checks(mu, lambda x: x))
                          for p, mu in zip(DEFAULTS.geom_ps, med_laws)), "law")
    return combine_reports("deviations", [geo.report(), rnd.report(), med.report()],
                           config={"geometric_laws": len(grid), "random_laws": 2 * random_count, "seed": seed})


def sweep_mean_deviation(grid=None, random_count: int = 500, seed=None,
                         interval: IntegerInterval = IntegerInterval(0, 60)) -> VerificationReport:
    seed = _seed(seed)
    grid = geom_grid() if grid is None else grid
    geo = _tally_reports("mean-deviation-geometric",
                         ((_geom_desc(g), mean_deviation_check(g)) for g in grid), "law")
    rnd = _tally_reports("mean-deviation-random",
                         ((list(mu.values), mean_deviation_check(mu))
                          for mu in random_laws(random_count, interval, seed)), "law")
    return combine_reports("mean-deviation", [geo.report(), rnd.report()],
                           config={"geometric_laws": len(grid), "random_laws": random_count, "seed": seed})


def sweep_reverse_jensen(pairs=None, grid=None, random_count: int = 500, seed=None,
                         interval: IntegerInterval = IntegerInterval(0, 60)) -> VerificationReport:
    seed = _seed(seed)
    pairs = DEFAULTS.rj_pairs if pairs is None else pairs
    grid = geom_grid() if grid is None else grid
    geo_laws = [(_geom_desc(g), g.pmf()) for g in grid]
    rnd_laws = [(list(mu.values), mu) for mu in random_laws(random_count, interval, seed)]
    reports = []
    for r, s in pairs:
        for label, laws in (("geometric", geo_laws), ("random", rnd_laws)):
            t = _tally_reports(f"reverse-jensen-{label}-{r}-{s}",
                               ((d, reverse_jensen_check(mu, r, s)) for d, mu in laws), "law")
            reports.append(t.report())
    return combine_reports("reverse-jensen", reports,
                           config={"pairs": [list(p) for p in pairs], "geometric_laws": len(grid),
                                   "random_laws": random_count, "seed": seed})


SWEEPS = {
    "four-functions": sweep_four_functions,
    "convolution": sweep_convolution,
    "prekopa-leindler": sweep_prekopa_leindler,
    "dilation": sweep_dilation,
    "functional-dilation": sweep_functional_dilation,
    "deviations": sweep_deviations,
    "mean-deviation": sweep_mean_deviation,
    "reverse-jensen": sweep_reverse_jensen,
}
