from fractions import Fraction

import pytest

from beliefgames import catalog
from beliefgames.model import Outcome

F = Fraction


def test_gamma_kernel_frozen_rows(gamma_spec):
    row = gamma_spec.kernel[("1T", "C", "C")]
    assert row == (Outcome(F(1, 8), "1++", "D"), Outcome(F(3, 8), "1+", "D"),
                   Outcome(F(1, 2), "1++", "D'"))
    assert gamma_spec.kernel[("0+", "Q", "C")] == (Outcome(F(1), "1++", "D"),)
    assert gamma_spec.kernel[("0++", "Q", "Q")] == (Outcome(F(1), "0*", "D'"),)
    assert gamma_spec.kernel[("1++", "C", "C")] == (
        Outcome(F(1, 2), "1T", "D"), Outcome(F(1, 2), "1++", "D'"))
    for i in gamma_spec.actions1:
        for j in gamma_spec.actions2:
            assert gamma_spec.kernel[("0*", i, j)] == (Outcome(F(1), "0*", "D"),)
            assert gamma_spec.kernel[("1*", i, j)] == (Outcome(F(1), "1*", "D"),)


def test_gamma_payoffs(gamma_spec):
    ones = {"1*", "1++", "1T", "1+"}
    for (k, _i, _j), v in gamma_spec.payoff.items():
        assert v == (1.0 if k in ones else 0.0)


def test_gamma_controlled_rows(gamma_spec):
    # player 2 controls the payoff-1 side: rows constant in player 1's action
    for k in ("1++", "1T", "1+"):
        for j in gamma_spec.actions2:
            rows = {gamma_spec.kernel[(k, i, j)] for i in gamma_spec.actions1}
            assert len(rows) == 1
    for k in ("0++", "0+"):
        for i in gamma_spec.actions1:
            rows = {gamma_spec.kernel[(k, i, j)] for j in gamma_spec.actions2}
            assert len(rows) == 1


def test_gamma_r1_isomorphic_to_gamma(gamma_spec):
    spec1 = catalog.gamma_r(1)
    rename = {"1T1": "1T"}
    assert sorted(rename.get(s, s) for s in spec1.states) == sorted(gamma_spec.states)
    for (k, i, j), row in spec1.kernel.items():
        mapped = tuple(Outcome(p, rename.get(n, n), s) for p, n, s in row)
        assert mapped == gamma_spec.kernel[(rename.get(k, k), i, j)]
        assert spec1.payoff[(k, i, j)] == gamma_spec.payoff[(rename.get(k, k), i, j)]


def test_gamma_r2_chain_and_boundary_rows():
    spec = catalog.gamma_r(2)
    assert len(spec.states) == 10
    # chain head feeds the boundary state
    assert spec.kernel[("0++", "C", "C")] == (
        Outcome(F(1, 2), "0T1", "D"), Outcome(F(1, 2), "0++", "D'"))
    # boundary row: 2^-r-1 refresh, (1/2)(1-2^-r) drift, 1/2 reset
    row = spec.kernel[("0T1", "C", "C")]
    assert row == (Outcome(F(1, 8), "0++", "D"), Outcome(F(3, 8), "0+", "D"),
                   Outcome(F(1, 2), "0++", "D'"))
    assert sum(o.prob for o in row) == 1
    # player-2 side boundary is 1T3 with risk exponent 2r
    row1 = spec.kernel[("1T3", "C", "C")]
    assert row1[0] == Outcome(F(1, 32), "1++", "D")
    assert row1[1] == Outcome(F(1, 2) * (1 - F(1, 16)), "1+", "D")
    assert spec.kernel[("0T1", "Q", "C")] == (Outcome(F(1), "0*", "D'"),)


def test_gamma_r_rejects_bad_r():
    with pytest.raises(ValueError):
        catalog.gamma_r(0)
    with pytest.raises(ValueError):
        catalog.gamma_r(-3)


def test_state_blind_tables():
    spec = catalog.state_blind()
    assert spec.kernel[("1++", "Q", "L")] == (Outcome(F(1), "0*", "-"),)
    assert spec.kernel[("0+", "Q", "R")] == (Outcome(F(1), "1++", "-"),)
    assert spec.kernel[("1T", "T", "R")] == (
        Outcome(F(3, 4), "1+", "-"), Outcome(F(1, 4), "1++", "-"))
    assert spec.kernel[("0++", "T", "L")] == (
        Outcome(F(1, 2), "0++", "-"), Outcome(F(1, 2), "0+", "-"))
    assert spec.kernel[("0++", "Q", "Q")] == (Outcome(F(1), "1*", "-"),)
    assert len(spec.signals) == 1


def test_one_informed_tables():
    spec = catalog.one_informed()
    assert spec.kernel[("1", "B", "R")] == (Outcome(F(1), "1*", "-"),)
    assert spec.kernel[("1", "T", "L")] == (Outcome(F(1), "1", "-"),)
    assert spec.kernel[("0+", "Q", "L")] == (Outcome(F(1), "1", "-"),)
    assert spec.kernel[("1", "Q", "R")] == (Outcome(F(1), "0*", "-"),)
    assert spec.states == ("1*", "1", "0*", "0++", "0+")


def test_registry():
    assert set(catalog.names()) == {"gamma", "gamma_r", "state_blind", "one_informed"}
    entry = catalog.get("gamma_r", r=3)
    assert entry.parameters == {"r": 3}
    with pytest.raises(KeyError):
        catalog.get("nope")
    with pytest.raises(ValueError):
        catalog.get("gamma", r=2)


def test_chain_beliefs_gamma(gamma_spec):
    b0 = catalog.one_chain_belief(gamma_spec, 0)
    assert b0.as_dict() == {"1++": F(1)}
    b2 = catalog.one_chain_belief(gamma_spec, 2)
    assert b2.as_dict() == {"1++": F(1, 4), "1+": F(3, 4)}
    b3 = catalog.one_chain_belief(gamma_spec, 3)
    assert b3.as_dict() == {"1T": F(1, 4), "1+": F(3, 4)}
    z4 = catalog.zero_chain_belief(gamma_spec, 4)
    assert z4.as_dict() == {"0++": F(1, 16), "0+": F(15, 16)}


def test_chain_beliefs_gamma_r():
    spec = catalog.gamma_r(2)
    b5 = catalog.one_chain_belief(spec, 5)  # n = 2mr + l with m=1, l=1
    assert b5.as_dict() == {"1T1": F(1, 16), "1+": F(15, 16)}
    z3 = catalog.zero_chain_belief(spec, 3)  # m=1, l=1
    assert z3.as_dict() == {"0T1": F(1, 4), "0+": F(3, 4)}


def test_classify_round_trip():
    for r in (1, 2, 3):
        spec = catalog.gamma() if r == 1 else catalog.gamma_r(r)
        for n in range(0, 10):
            assert catalog.classify_chain_belief(
                spec, catalog.one_chain_belief(spec, n)) == ("one", n)
            assert catalog.classify_chain_belief(
                spec, catalog.zero_chain_belief(spec, n)) == ("zero", n)


def test_classify_rejects_off_chain(gamma_spec):
    from beliefgames.beliefs import Belief
    off = Belief({"1++": F(1, 3), "1+": F(2, 3)})
    assert catalog.classify_chain_belief(gamma_spec, off) is None
    assert catalog.node_label(gamma_spec, off) == off.label()
    assert catalog.node_label(gamma_spec, catalog.one_chain_belief(gamma_spec, 4)) == "1_4"
