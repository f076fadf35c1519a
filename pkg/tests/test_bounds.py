from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from chainpay import CollapseMove, DeltaGeom, ParameterOutOfRange, collapse_gain
from chainpay.analysis import (
    Objective,
    bound_pair,
    dominance_test,
    objective_bound,
    partial_sum_check,
    ratio_bounds_check,
)


def test_objective_bounds_by_hand():
    # 1/2 * (1 + 1/2 + 1/4)
    assert objective_bound("MINCOST", F(1, 2), 3, gamma=F(1, 2)) == F(7, 8)
    # (1 - 1/2) / (1 - 1/8)
    assert objective_bound(Objective.MAXLEAF, F(1, 2), 3) == F(4, 7)
    with pytest.raises(ParameterOutOfRange):
        objective_bound("MINCOST", F(1, 2), 3)
    with pytest.raises(ParameterOutOfRange):
        objective_bound("MAXLEAF", 1, 3)


def test_mincost_dominance_small():
    report = dominance_test("MINCOST", F(1, 2), F(1, 2), t_max=8, samples=50, seed=3)
    assert report.passed
    assert report.tight_geometric


def test_maxleaf_dominance_small():
    report = dominance_test("MAXLEAF", F(1, 2), t_max=8, samples=50, seed=3)
    assert report.passed
    assert all(v <= objective_bound("MAXLEAF", F(1, 2), t) for t, v in report.best_leaf.items())


def test_harness_catches_a_corrupted_reference():
    # a reference slightly above the true minimum must produce counterexamples
    geom_total = lambda t: objective_bound("MINCOST", F(1, 2), t, gamma=F(1, 2))
    report = dominance_test(
        "MINCOST", F(1, 2), F(1, 2), t_max=6, samples=200, seed=0,
        reference=lambda t: geom_total(t) + F(1, 1000),
    )
    assert not report.passed
    report = dominance_test(
        "MAXLEAF", F(1, 2), t_max=6, samples=200, seed=0,
        reference=lambda t: objective_bound("MAXLEAF", F(1, 2), t) - F(1, 1000),
    )
    assert not report.passed


def test_dominance_rejects_infeasible_inputs():
    with pytest.raises(ParameterOutOfRange):
        dominance_test("MINCOST", F(1, 2), t_max=2, samples=1)
    with pytest.raises(ParameterOutOfRange):
        dominance_test("MAXLEAF", F(1, 2), t_max=2, samples=1, epsilon=F(1, 2))


@given(
    st.fractions(F(1, 16), F(15, 16), max_denominator=16),
    st.fractions(F(1, 8), 4, max_denominator=8),
    st.integers(1, 30),
    st.integers(1, 30),
)
def test_bound_ratio_closed_form(delta, eps, n, t):
    pair = bound_pair(delta, eps, n, t)
    expected = (1 - delta ** (n + 1)) * (1 - delta**t) / ((1 + eps) * (1 - delta) * (1 - delta ** (t + n)))
    assert pair.b / pair.a == expected
    assert 1 / (1 + eps) <= expected <= 1 / ((1 + eps) * (1 - delta))


def test_ratio_bounds_outside_region_flags_dominance():
    report = ratio_bounds_check(F(2, 3), F(1), n_max=5, t_max=5)
    assert not report.dominance_expected
    assert report.dominance_failures
    assert not report.bound_violations
    assert report.passed


def test_partial_sums_by_hand():
    report = partial_sum_check(F(1, 2), 4)
    assert report.terms == (F(1, 2) - F(1, 8), F(0), F(1, 8) - F(1, 2))
    assert report.partial_sums == (F(3, 8), F(3, 8), F(0))
    assert report.passed
    with pytest.raises(ParameterOutOfRange):
        partial_sum_check(F(1, 2), 4, p=4)


@given(
    st.fractions(F(1, 16), F(15, 16), max_denominator=16),
    st.integers(2, 25).flatmap(lambda t: st.tuples(st.just(t), st.integers(1, t - 1))),
    st.integers(1, 25),
)
def test_collapse_gain_is_a_scaled_partial_sum(delta, tp, k):
    t, p = tp
    k = min(k, t - p)
    s_p = partial_sum_check(delta, t, p).partial_sums[-1]
    gain = collapse_gain(DeltaGeom(1, delta=delta), CollapseMove(k, t, p)).gain
    scale = delta ** (t - p - k) * (1 - delta) / ((1 - delta ** (t - p)) * (1 - delta**t))
    assert gain == -scale * s_p
