import math
import warnings

import numpy as np
import pytest

from lcdk.closed_forms import solve_p_for_mean
from lcdk.localization import (
    ConvexFunctional, InfeasibleError, LinearConstraint, brute_force_max, candidate_table,
    check_convexity, enumerate_extremal_candidates, has_sign_change, lambda_profile, maximize_convex,
    moment_functional, neg_entropy_functional, squared_mean_functional, table_functional, tail_functional,
    tail_extremizer_shape_check, two_constraint_localization_check, upper_tail_functional,
)
from lcdk.sequences import IntegerInterval, PreconditionError, ReferenceMeasure, is_log_affine, normalize, as_sequence


def test_vacuous_constraint_keeps_everything():
    h = LinearConstraint.constant(0.0, 0, 2)
    table = candidate_table(h, 0, 2)
    points = {(int(k), int(l)) for k, l, kind in zip(table.ks, table.ls, table.kinds) if k == l}
    assert points == {(0, 0), (1, 1), (2, 2)}
    pairs = {(int(k), int(l)) for k, l in zip(table.ks, table.ls)}
    assert pairs == {(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)}
    assert len(table) == 3 + 3 * 512


def test_root_matches_closed_form_solver():
    h = LinearConstraint.mean_at_most(1.0, 0, 3)
    table = candidate_table(h, 0, 3)
    roots = [lp for k, l, lp, kind in zip(table.ks, table.ls, table.log_ps, table.kinds)
             if (k, l) == (0, 3) and kind == "root"]
    assert len(roots) == 1
    assert math.exp(roots[0]) == pytest.approx(solve_p_for_mean(0, 3, 1.0), rel=1e-9)


def test_negative_constraint_is_infeasible():
    h = LinearConstraint.constant(-1.0, 0, 4)
    assert enumerate_extremal_candidates(h, 0, 4) == []
    with pytest.raises(InfeasibleError):
        maximize_convex(tail_functional(1), h, 0, 4)


def test_candidates_are_feasible_and_normalized():
    h = LinearConstraint.mean_at_most(3.3, 0, 10)
    table = candidate_table(h, 0, 10)
    assert np.all(table.constraint_values >= -1e-12)
    assert np.allclose(table.pmfs.sum(axis=1), 1.0)


def test_linear_functional_peaks_at_a_point_mass():
    phi = table_functional([0.3, 0.7])
    res = maximize_convex(phi, LinearConstraint.constant(0.0, 0, 1), 0, 1)
    assert res.best_value == pytest.approx(0.7, abs=1e-15)


def test_tail_beyond_window_is_zero():
    res = maximize_convex(tail_functional(6), LinearConstraint.mean_at_most(2.0, 0, 6), 0, 6)
    assert res.best_value == 0


def test_brute_force_sentinel_and_point_mass_limit():
    phi = ConvexFunctional("p0", lambda P, xs: P[:, 0])
    h = LinearConstraint.constant(0.0, 0, 5)
    assert brute_force_max(phi, h, 0, 5, samples=0) == -math.inf
    assert brute_force_max(phi, h, 0, 5, samples=10_000) > 0.9


@pytest.mark.parametrize("phi", [tail_functional(4.5), upper_tail_functional(7), moment_functional(2),
                                 moment_functional(1.5), neg_entropy_functional(), squared_mean_functional()])
def test_engine_dominates_sampler(phi):
    h = LinearConstraint.mean_at_most(3.2, 0, 12)
    res = maximize_convex(phi, h, 0, 12)
    assert res.best_value >= brute_force_max(phi, h, 0, 12, samples=5000, seed=1) - 1e-9
    assert is_log_affine(res.witness())


def test_engine_dominates_sampler_with_poisson_reference():
    ref = ReferenceMeasure.poisson(2.0, IntegerInterval(0, 12))
    h = LinearConstraint.mean_at_most(2.5, 0, 12)
    phi = tail_functional(5)
    res = maximize_convex(phi, h, 0, 12, reference=ref)
    assert res.best_value >= brute_force_max(phi, h, 0, 12, reference=ref, samples=5000, seed=2) - 1e-9
    assert is_log_affine(res.witness(), ref)


def test_lambda_profile_examples():
    h0 = LinearConstraint.constant(0.0, 0, 3)
    mu = normalize(as_sequence([1, 2, 3, 4]))
    assert np.all(lambda_profile(mu, h0) == 0)
    h = LinearConstraint(IntegerInterval(0, 3), (5, -1, 2, 7))
    delta2 = normalize(as_sequence([0, 0, 1, 0]))
    assert lambda_profile(delta2, h).tolist() == [0, 0, 2, 2]


def test_root_witness_has_sign_constant_profile():
    h = LinearConstraint.mean_at_most(2.7, 0, 15)
    res = maximize_convex(tail_functional(6), h, 0, 15)
    assert res.kind == "root"
    assert abs(res.constraint_value) <= 1e-9
    prof = lambda_profile(res.witness(), h)
    assert not has_sign_change(prof)
    assert has_sign_change(np.array([1.0, -1.0, 0.0]))


def test_two_constraint_examples():
    one = np.ones(9)
    assert two_constraint_localization_check(one, one, 0, 8, trials=200).ok
    f = np.arange(9) - 3.0
    rep = two_constraint_localization_check(f, -f, 0, 8, trials=200)
    assert rep.ok and not rep.extra["premise_holds"]
    rng = np.random.default_rng(5)
    for i in range(100):
        f, g = rng.normal(size=9) + 0.3, rng.normal(size=9) + 0.3
        assert two_constraint_localization_check(f, g, 0, 8, trials=100, seed=i).extra["counterexamples"] == 0


def test_tail_extremizer_starts_at_left_endpoint():
    assert tail_extremizer_shape_check(2, 5, 0, 12)
    assert tail_extremizer_shape_check(2, 13, 0, 12)
    with pytest.raises(InfeasibleError):
        tail_extremizer_shape_check(-1, 5, 0, 12)


def test_search_is_deterministic():
    h = LinearConstraint.mean_at_most(4.1, 0, 14)
    a = maximize_convex(moment_functional(3), h, 0, 14).to_json()
    b = maximize_convex(moment_functional(3), h, 0, 14).to_json()
    assert a == b


def test_non_convex_functional_is_rejected():
    concave = ConvexFunctional("neg-square", lambda P, xs: -(P @ xs.astype(float)) ** 2, declared_convex=False)
    with pytest.raises(PreconditionError):
        maximize_convex(concave, LinearConstraint.constant(0.0, 0, 3), 0, 3)
    liar = ConvexFunctional("neg-square", concave.evaluator)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert not check_convexity(liar, IntegerInterval(0, 6), ReferenceMeasure.counting())
