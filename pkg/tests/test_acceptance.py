"""Acceptance criteria 1-10 at full scale, each with its runtime budget.

Every test records one ``criterion N PASS|FAIL`` line; the lines are also
collected into the terminal summary.
"""
import itertools
import math
from contextlib import contextmanager
from fractions import Fraction
from time import perf_counter

import numpy as np

from lcdk.closed_forms import TruncGeomParams, normalizing_constant, trunc_geom_mean, trunc_geom_tail
from lcdk.config import DEFAULTS
from lcdk.deviations import modulus_of_regularity, modulus_of_regularity_naive
from lcdk.localization import (
    LinearConstraint, brute_force_max, maximize_convex, moment_functional, neg_entropy_functional,
    squared_mean_functional, tail_extremizer_shape_check, tail_functional, upper_tail_functional,
)
from lcdk.sequences import IntegerInterval, Sequence, is_log_affine, is_log_concave, is_log_concave_gap_form
from lcdk.sweeps import (
    sweep_convolution, sweep_deviations, sweep_dilation, sweep_mean_deviation, sweep_prekopa_leindler,
    sweep_reverse_jensen,
)

F = Fraction


@contextmanager
def criterion(record, n: int, title: str, budget: float):
    """Time the block; record PASS only if it finished without error inside the budget."""
    info = {"detail": ""}
    t0 = perf_counter()
    try:
        yield info
    except BaseException as exc:
        msg = (str(exc).splitlines() or [""])[0][:120]
        record(f"criterion {n} FAIL  {title}  {perf_counter() - t0:.1f}s/{budget:g}s  {type(exc).__name__}: {msg}")
        raise
    elapsed = perf_counter() - t0
    ok = elapsed < budget
    record(f"criterion {n} {'PASS' if ok else 'FAIL'}  {title}  {elapsed:.1f}s/{budget:g}s  {info['detail']}")
    assert ok, f"criterion {n} took {elapsed:.1f}s, budget {budget}s"


def test_criterion_01_closed_forms(record_criterion):
    with criterion(record_criterion, 1, "closed forms vs direct summation", 10) as info:
        worst, laws, tails = 0.0, 0, 0
        for p in DEFAULTS.geom_ps:
            for k in DEFAULTS.geom_ks:
                for d in range(201):
                    l = k + d
                    w = np.array([p**j for j in range(k, l + 1)])
                    Z = math.fsum(w)
                    mean = math.fsum(j * x for j, x in zip(range(k, l + 1), w)) / Z
                    params = TruncGeomParams(p, k, l)
                    errs = [abs(normalizing_constant(params) * Z - 1),
                            abs(trunc_geom_mean(params) - mean) / mean if mean else abs(trunc_geom_mean(params))]
                    # the tail is a step function, so integer t cover every value it takes
                    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
                    for t in range(k - 1, l + 1):
                        direct = suffix[t + 1 - k] / Z
                        got = trunc_geom_tail(params, t)
                        errs.append(abs(got - direct) / direct if direct else abs(got))
                        tails += 1
                    worst = max(worst, max(errs))
                    laws += 1
        info["detail"] = f"{laws} laws, {tails} tails, worst relative error {worst:.2e}"
        assert laws == 9648
        assert worst <= 1e-12


def test_criterion_02_convolution_closure(record_criterion):
    with criterion(record_criterion, 2, "convolution closure", 30) as info:
        rep = sweep_convolution(trials=1000, max_support=30, rationals=200, max_m=12)
        parts = rep.extra["parts"]
        closure = parts["convolution"]
        gap = parts["geometric-series-gap"]
        info["detail"] = (f"{closure['instances_checked']} convolutions, "
                          f"{gap['instances_checked']} exact gap checks, backend {rep.config['backend']}")
        assert rep.config["backend"] == "rational"
        assert closure["log_concave_closed"] and closure["log_affine_closed"]
        assert closure["passes"] == closure["instances_checked"] == 2000
        assert gap["passes"] == gap["instances_checked"] == 200 * 13
        assert rep.ok


def test_criterion_03_localization_dominance(record_criterion):
    with criterion(record_criterion, 3, "localization dominance", 120) as info:
        rng = np.random.default_rng(DEFAULTS.seed)
        builders = [
            lambda: tail_functional(float(rng.uniform(0, 20))),
            lambda: upper_tail_functional(float(rng.uniform(1, 20))),
            lambda: moment_functional(float(rng.choice([0.5, 1, 1.5, 2, 3]))),
            lambda: neg_entropy_functional(),
            lambda: squared_mean_functional(),
        ]
        worst = math.inf
        for i in range(50):
            phi = builders[i % len(builders)]()
            c = float(rng.uniform(0.25, 19.75))
            h = LinearConstraint.mean_at_most(c, 0, 20)
            res = maximize_convex(phi, h, 0, 20)
            oracle = brute_force_max(phi, h, 0, 20, samples=10_000, seed=DEFAULTS.seed + i)
            worst = min(worst, res.best_value - oracle)
            assert res.best_value >= oracle - 1e-9, (phi.name, c)
            assert is_log_affine(res.witness()), (phi.name, c)
        info["detail"] = f"50 instances, min(engine - oracle) = {worst:.2e}"


def test_criterion_04_tail_extremizer_shape(record_criterion):
    with criterion(record_criterion, 4, "tail extremizer starts at M", 30) as info:
        rng = np.random.default_rng(DEFAULTS.seed)
        pairs = [(2.0, 5.0), (0.0, 1.0), (5.99, 6.0), (11.5, 12.0)]
        while len(pairs) < 20:
            t = float(rng.integers(1, 13)) if rng.random() < 0.5 else float(rng.uniform(0.5, 12))
            pairs.append((float(rng.uniform(0, t)), t))
        bad = [(c, t) for c, t in pairs if not tail_extremizer_shape_check(c, t, 0, 12)]
        info["detail"] = f"{len(pairs)} (c, t) pairs, {len(bad)} off the left endpoint"
        assert not bad


def test_criterion_05_dilation_exhaustive(record_criterion):
    with criterion(record_criterion, 5, "dilation exhaustive on [0, 12]", 300) as info:
        rep = sweep_dilation(K=IntegerInterval(0, 12), subsets=None, random_count=200)
        assert rep.config["subsets"] == 2**13
        info["detail"] = (f"{rep.instances_checked} instances ({rep.config['log_affine_laws']} log-affine + "
                          f"{rep.config['random_laws']} random laws), worst slack {rep.worst_slack:.2e}")
        assert rep.worst_slack >= -1e-12
        assert rep.ok


def test_criterion_06_prekopa_leindler(record_criterion):
    with criterion(record_criterion, 6, "Prekopa-Leindler", 60) as info:
        rep = sweep_prekopa_leindler(interval=IntegerInterval(0, 25), trials=1000, ts=(0.25, 0.5, 0.75))
        parts = rep.extra["parts"]
        form = parts["sup-convolution-interval-form"]
        info["detail"] = (f"random worst slack {parts['prekopa-leindler']['worst_slack']:.2e}, "
                          f"{form['instances_checked']} interval pairs match the closed form")
        assert parts["prekopa-leindler"]["instances_checked"] == 3000
        assert rep.worst_slack >= -1e-12
        assert form["passes"] == form["instances_checked"]
        assert rep.config["indicator_window"] == [0, 15]
        assert rep.ok


def test_criterion_07_modulus_bound(record_criterion):
    with criterion(record_criterion, 7, "modulus of regularity", 10) as info:
        K = IntegerInterval(1, 200)
        vals = {t: modulus_of_regularity(lambda x: x, K, F(1, t)) for t in (2, 3, 4, 6, 8, 16)}
        small = modulus_of_regularity(lambda x: x, IntegerInterval(1, 64), F(1, 4))
        oracle = modulus_of_regularity_naive(lambda x: x, IntegerInterval(1, 64), F(1, 4))
        info["detail"] = ", ".join(f"t={t}: {v}" for t, v in vals.items()) + f"; [1,64] t=4: {small}"
        assert all(v <= F(2, t) for t, v in vals.items())
        assert small == oracle == F(1, 3)


def test_criterion_08_deviations(record_criterion):
    with criterion(record_criterion, 8, "deviation corollaries", 60) as info:
        dev = sweep_deviations(random_count=500)
        mean = sweep_mean_deviation(random_count=500)
        info["detail"] = (f"median bounds {dev.instances_checked} checks worst {dev.worst_slack:.2e}; "
                          f"mean bound {mean.instances_checked} checks worst {mean.worst_slack:.2e}")
        assert dev.config["geometric_laws"] == 9648 and mean.config["geometric_laws"] == 9648
        assert dev.worst_slack >= -1e-12 and mean.worst_slack >= -1e-12
        assert dev.ok and mean.ok


def test_criterion_09_reverse_jensen(record_criterion):
    with criterion(record_criterion, 9, "reverse Jensen", 30) as info:
        rep = sweep_reverse_jensen(pairs=((1, 2), (1, 3), (2, 4), (1, 8)), random_count=500)
        info["detail"] = f"{rep.instances_checked} checks, worst slack {rep.worst_slack:.3f}"
        assert rep.instances_checked == 4 * (9648 + 500)
        assert rep.worst_slack >= 0
        assert rep.ok


def test_criterion_10_predicate_equivalence(record_criterion):
    with criterion(record_criterion, 10, "three-point vs gap form", 60) as info:
        count, disagree = 0, 0
        for n in range(1, 7):
            for vals in itertools.product((0, 1, 2, 3), repeat=n):
                f = Sequence(IntegerInterval(0, n - 1), vals)
                disagree += is_log_concave(f) != is_log_concave_gap_form(f)
                count += 1
        info["detail"] = f"{count} sequences, {disagree} disagreements"
        assert count == sum(4**n for n in range(1, 7))
        assert disagree == 0
