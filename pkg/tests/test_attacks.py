from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from chainpay import (
    CheckBounds,
    CollapseMove,
    GammaDeltaGeom,
    ParameterOutOfRange,
    PropertySpec,
    SybilMove,
    Tabular,
    best_attack,
    check_property,
    collapse_gain,
    make_mechanism,
    sybil_gain,
)


def test_topdown_best_collapse():
    result = best_attack(make_mechanism("topdown"), "collapse", t=3)
    assert result.move == CollapseMove(1, 3, 2)
    # R(1,1) - (R(1,3) + R(2,3) + R(3,3)) = 1/4 - (1/16 + 1/32 + 1/64)
    assert result.gain == F(1, 4) - F(7, 64)
    assert result.profitable


def test_sybil_gain_by_hand():
    mech = make_mechanism("gdgeom:1/2,1/2")
    result = sybil_gain(mech, SybilMove(2, 3, 2))
    # before R(2,3) = 1/4; after R(2,5)+R(3,5)+R(4,5) = 1/16 + 1/8 + 1/4
    assert result.before == F(1, 4)
    assert result.after == F(7, 16)
    assert result.ratio == F(7, 4)


def test_ratio_undefined_for_unpaid_agent():
    result = sybil_gain(make_mechanism("wta"), SybilMove(1, 2, 1))
    assert result.before == 0 and result.ratio is None
    assert not result.profitable


def test_attack_json():
    result = best_attack(make_mechanism("topdown"), "collapse", t=2)
    assert result.to_dict() == {
        "kind": "collapse",
        "move": {"k": 1, "t": 2, "p": 1},
        "before": "3/16",
        "after": "1/4",
        "gain": "1/16",
        "ratio": "4/3",
    }


@pytest.mark.parametrize(
    "factory,args",
    [(SybilMove, (0, 1, 1)), (SybilMove, (2, 1, 1)), (SybilMove, (1, 1, 0)),
     (CollapseMove, (1, 2, 2)), (CollapseMove, (1, 2, 0)), (CollapseMove, (0, 2, 1))],
)
def test_invalid_moves(factory, args):
    with pytest.raises(ParameterOutOfRange):
        factory(*args)


def test_search_argument_errors():
    mech = make_mechanism("topdown")
    with pytest.raises(ParameterOutOfRange):
        best_attack(mech, "sybil", t=3)
    with pytest.raises(ParameterOutOfRange):
        best_attack(mech, "collapse", t=1)
    with pytest.raises(ParameterOutOfRange):
        best_attack(mech, "bribe", t=3)


@given(
    st.fractions(F(1, 16), 1, max_denominator=16),
    st.fractions(F(1, 16), F(15, 16), max_denominator=16),
    st.integers(1, 12),
    st.integers(1, 12),
    st.integers(1, 12),
)
def test_gdgeom_sybil_ratio_is_geometric_sum(gamma, delta, k, extra, n):
    mech = GammaDeltaGeom(1, gamma=gamma, delta=delta)
    t = k + extra - 1
    ratio = sybil_gain(mech, SybilMove(k, t, n)).ratio
    assert ratio == sum(delta**i for i in range(n + 1))


small = st.fractions(min_value=0, max_value=1, max_denominator=6)


@st.composite
def tables(draw, t_max=7):
    return Tabular(1, table={(k, t): draw(small) for t in range(1, t_max + 1) for k in range(1, t + 1)})


@settings(max_examples=60, deadline=None)
@given(tables())
def test_attack_search_consistent_with_checker(mech):
    # DSP fails within (t<=3, n<=4) iff some agent has a profitable sybil there
    dsp = check_property(mech, PropertySpec.parse("DSP"), CheckBounds(3, 4, 4))
    profitable = any(
        best_attack(mech, "sybil", k=k, t=t, n_max=4).profitable
        for t in range(1, 4) for k in range(1, t + 1)
    )
    assert dsp.passed != profitable

    cp = check_property(mech, PropertySpec.parse("CP"), CheckBounds(7, 1, 7))
    collapses = any(best_attack(mech, "collapse", t=t).profitable for t in range(2, 8))
    assert cp.passed != collapses


@settings(max_examples=40, deadline=None)
@given(tables())
def test_best_collapse_is_maximum_with_smallest_tie(mech):
    t = 6
    best = best_attack(mech, "collapse", t=t)
    moves = [CollapseMove(k, t, p) for k in range(1, t) for p in range(1, t - k + 1)]
    gains = {(m.k, m.p): collapse_gain(mech, m).gain for m in moves}
    top = max(gains.values())
    assert best.gain == top
    assert (best.move.k, best.move.p) == min(key for key, g in gains.items() if g == top)


def test_best_sybil_tie_keeps_smallest_n():
    result = best_attack(make_mechanism("wta"), "sybil", k=1, t=2, n_max=5)
    assert result.move.n == 1 and result.gain == 0
