import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lcdk.closed_forms import TruncGeomParams
from lcdk.inequalities import (
    convolution_stability_reduction_check, dilation_check, dilation_four_functions, dilation_masks,
    dilation_set, dilation_set_all_intervals, four_functions_check, geometric_series_gap, geometric_window,
    half_open, interval_sup_convolution_bounds, prekopa_leindler_check, prekopa_leindler_slack, psi,
    random_unimodal, sup_convolution,
)
from lcdk.sequences import (
    COUNTING, IntegerInterval, PreconditionError, ReferenceMeasure, Sequence, as_sequence,
    is_log_concave, is_unimodal, normalize, random_log_concave,
)

F = Fraction


def indicator(a, b):
    return Sequence(IntegerInterval(a, b), (1,) * (b - a + 1))


# -- four functions ----------------------------------------------------------------

def test_four_functions_equal_inputs_give_zero_slack():
    f = np.array([1.0, 2.0, 0.5, 3.0, 1.0])
    rep = four_functions_check(f, f, f, f, 0.7, 1.3, trials=100)
    assert rep.ok and rep.passes == rep.instances_checked
    assert abs(rep.worst_slack) < 1e-12


def test_four_functions_monotonicity_instance():
    A = np.array([0, 1, 1, 0, 1, 0], dtype=float)
    K = np.ones(6)
    rep = four_functions_check(A, A, K, K, 1.0, 1.0, trials=100)
    assert rep.ok and rep.extra["log_affine_pass"] and rep.extra["log_concave_pass"]


def test_four_functions_rejects_negative_inputs():
    f = np.array([1.0, -1.0])
    with pytest.raises(PreconditionError):
        four_functions_check(f, f, f, f, 1, 1)


def test_dilation_four_functions_instance_is_consistent():
    K = IntegerInterval(0, 10)
    rng = np.random.default_rng(2)
    for _ in range(10):
        A = {n for n in K if rng.random() < 0.7}
        for d in (0.25, 0.5, 0.75):
            fs, (a, b) = dilation_four_functions(A, K, d)
            rep = four_functions_check(*fs, a, b, interval=K, trials=200)
            assert rep.ok and rep.extra["log_affine_pass"]


def test_four_functions_consistency_flags_a_broken_reduction():
    # E[1_{0}] <= E[1_{1}] fails for some laws; the grid sees it, so ok stays True
    f1, f3 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    one = np.ones(2)
    rep = four_functions_check(f1, one, f3, one, 1.0, 1.0, trials=50)
    assert not rep.extra["log_affine_pass"] and rep.ok


# -- convolution -----------------------------------------------------------------------

def test_convolution_closure_small():
    rep = convolution_stability_reduction_check(COUNTING, trials=100, max_support=12, seed=3)
    assert rep.ok and rep.passes == rep.instances_checked


def test_convolution_closure_binomial_reference():
    rep = convolution_stability_reduction_check(ReferenceMeasure.binomial(20), trials=50, seed=4)
    assert rep.ok


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=F(1, 100), max_value=100), st.integers(0, 12))
def test_geometric_series_gap_nonnegative(R, m):
    assert geometric_series_gap(R, m) >= 0


# -- sup-convolution / Prekopa-Leindler ---------------------------------------------

def test_sup_convolution_interval_example():
    h = sup_convolution(indicator(0, 2), indicator(1, 3), F(1, 2))
    assert (h.lo, h.hi) == (0, 3) and all(v == 1 for v in h.values)


def test_sup_convolution_point_masses():
    for a, b in ((0, 3), (2, 2), (1, 6)):
        h = sup_convolution(indicator(a, a), indicator(b, b), F(1, 2))
        mid = F(a + b, 2)
        assert {n for n, v in h.items() if v > 0} == {n for n in range(a - 1, b + 2) if abs(n - mid) < 1}


def test_sup_convolution_dominates_log_concave_input():
    f = random_log_concave(9, IntegerInterval(0, 12))
    h = sup_convolution(f, f, F(1, 2))
    assert all(h[n] >= float(f[n]) - 1e-15 for n in f.interval)


def test_sup_convolution_interval_form_exhaustive_small():
    pairs = [(a, b) for a in range(8) for b in range(a, 8)]
    for t in (F(1, 4), F(1, 3), F(1, 2), F(2, 3)):
        for (a1, a2), (b1, b2) in itertools.product(pairs, repeat=2):
            h = sup_convolution(indicator(a1, a2), indicator(b1, b2), t)
            assert (h.lo, h.hi) == interval_sup_convolution_bounds(a1, a2, b1, b2, t)
            assert all(v == 1 for v in h.values)


def test_sup_convolution_rejects_bad_t():
    with pytest.raises(PreconditionError):
        sup_convolution(indicator(0, 1), indicator(0, 1), 1)


def test_prekopa_leindler_equality_for_constant_functions():
    mu = TruncGeomParams(F(2, 3), 0, 9).pmf()
    one = indicator(0, 9)
    for t in (0.25, 0.5, 0.75):
        assert prekopa_leindler_slack(one, one, t, mu) == pytest.approx(0, abs=1e-15)


def test_prekopa_leindler_randomized():
    rng = np.random.default_rng(11)
    iv = IntegerInterval(0, 15)
    for _ in range(200):
        f, g = random_unimodal(rng, iv), random_unimodal(rng, iv)
        assert is_unimodal(f) and is_unimodal(g)
        mu = random_log_concave(rng, iv)
        for t in (0.25, 0.5, 0.75):
            assert prekopa_leindler_check(f, g, t, mu).worst_slack >= -1e-12


def test_prekopa_leindler_hypotheses_are_reported_distinctly():
    mu = normalize(as_sequence([1, 1, 1]))
    with pytest.raises(PreconditionError):
        prekopa_leindler_check(as_sequence([2, 1, 2]), indicator(0, 2), 0.5, mu)
    with pytest.raises(PreconditionError):
        prekopa_leindler_check(indicator(0, 2), indicator(0, 2), 0.5, normalize(as_sequence([1, 0, 1])))


# -- dilation ------------------------------------------------------------------------

def test_half_open_intervals():
    assert list(half_open(3, 1)) == [1, 2]
    assert list(half_open(1, 3)) == [2, 3]
    assert list(half_open(2, 2)) == []
    assert all(len(half_open(x, y)) == abs(x - y) for x in range(5) for y in range(5))


def test_dilation_set_examples():
    K = IntegerInterval(0, 4)
    assert dilation_set({0, 1, 3, 4}, K, F(1, 2)) == {0, 4}
    assert dilation_set(set(K), K, F(1, 3)) == set(K)
    assert dilation_set(set(), K, F(1, 3)) == set()
    with pytest.raises(PreconditionError):
        dilation_set({7}, K, F(1, 2))


def _all_interval_masks(masks, d):
    """Dilation sets from the definition, every interval containing z, vectorized over rows."""
    n = masks.shape[1]
    prefix = np.zeros((masks.shape[0], n + 1), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(masks, axis=1)
    out = masks.copy()
    for z in range(n):
        for lo in range(z + 1):
            for hi in range(z, n):
                hits = prefix[:, hi + 1] - prefix[:, lo] - masks[:, z]
                out[:, z] &= hits * d.denominator >= (d.denominator - d.numerator) * (hi - lo)
    return out


def test_endpoint_anchored_reduction_exhaustive():
    K = IntegerInterval(0, 10)
    n = len(K)
    masks = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
    for d in (F(1, 10), F(1, 3), F(1, 2), F(3, 4), F(9, 10)):
        fast = dilation_masks(masks, d)
        assert np.array_equal(fast, _all_interval_masks(masks, d))
        for row in range(0, 2**n, 97):
            A = set(np.flatnonzero(masks[row]).tolist())
            assert set(np.flatnonzero(fast[row]).tolist()) == dilation_set(A, K, d)
            assert dilation_set(A, K, d) == dilation_set_all_intervals(A, K, d)


def test_endpoint_anchored_reduction_exhaustive_small_window():
    K = IntegerInterval(0, 7)
    for bits in range(2**8):
        A = {j for j in range(8) if bits >> j & 1}
        for d in (F(1, 5), F(1, 2), F(4, 5)):
            assert dilation_set(A, K, d) == dilation_set_all_intervals(A, K, d)


def test_dilation_check_full_set_is_tight():
    K = IntegerInterval(0, 8)
    mu = random_log_concave(3, K)
    assert abs(dilation_check(mu, set(K), K, 0.4).worst_slack) < 1e-15
    sub = IntegerInterval(2, 5)
    assert abs(dilation_check(mu, set(sub), sub, 0.4).worst_slack) < 1e-15


def test_dilation_check_random():
    K = IntegerInterval(0, 12)
    rng = np.random.default_rng(8)
    for _ in range(300):
        mu = random_log_concave(rng, K)
        A = {n for n in K if rng.random() < 0.6}
        assert dilation_check(mu, A, K, float(rng.uniform(0.05, 0.95))).ok


def test_dilation_check_rejects_non_log_concave():
    mu = normalize(as_sequence([1, 0, 1]))
    with pytest.raises(PreconditionError):
        dilation_check(mu, {0}, IntegerInterval(0, 2), 0.5)


def test_geometric_window_truncation():
    law, lost = geometric_window(0.5)
    assert lost <= 1e-12 and is_log_concave(law)
    assert sum(law.values) == pytest.approx(1.0, abs=1e-15)
    rep = dilation_check(law, set(range(0, len(law.interval), 2)) | {0, 1}, law.interval, 0.5,
                         truncation_mass=lost)
    assert rep.ok and rep.config["truncation_mass"] == lost


# -- psi -----------------------------------------------------------------------------

def test_psi_values():
    assert psi(0, 0.3) == 0 and psi(1, 0.3) == 0
    assert psi(0.75, 0.5) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(PreconditionError):
        psi(1.5, 0.5)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0.01, 0.99))
def test_psi_bounds(x, d):
    assert 0 <= psi(x, d) <= (1 - d) * x + 1e-15


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.001, 1), min_size=1, max_size=8), st.floats(0.01, 0.99))
def test_psi_subadditive_on_partitions(weights, d):
    total = sum(weights) * 1.0001
    xs = [w / total for w in weights]
    assert psi(math.fsum(xs), d) <= math.fsum(psi(x, d) for x in xs) + 1e-12
