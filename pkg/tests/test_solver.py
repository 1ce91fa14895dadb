import numpy as np
import pytest

from beliefgames import analytics, beliefs, catalog, solver
from beliefgames._kernels import sweep_once_numpy
from beliefgames.beliefs import Belief
from beliefgames.solver import (discounted_value, evaluate_profile,
                                finite_horizon, neyman_gap, shapley_operator,
                                threshold_profile)


@pytest.fixture(scope="module")
def absorbing_chain(gamma_spec):
    return beliefs.reduce(gamma_spec, Belief.point("1*"), 8)


def test_shapley_single_absorbing_node(absorbing_chain):
    for lam in (0.25, 0.5, 1.0):
        for f0 in (0.0, 0.3, 1.0):
            out = shapley_operator(absorbing_chain, lam, np.array([f0]))
            assert out[0] == pytest.approx(lam * 1.0 + (1.0 - lam) * f0, abs=1e-15)


def test_shapley_constant_fixed_point(gamma_chain_small):
    # constant payoff c and continuation c reproduce c: check on a chain whose
    # payoffs are replaced by a constant via the affine identity
    lam = 0.3
    f = np.zeros(len(gamma_chain_small))
    out = shapley_operator(gamma_chain_small, lam, f)
    # payoff-1 side nodes give lam*1, payoff-0 side lam*0
    spec = gamma_chain_small.spec
    for nd in range(len(gamma_chain_small)):
        tag = catalog.classify_chain_belief(spec, gamma_chain_small.nodes[nd])
        if tag == ("one", 0):
            assert out[nd] == pytest.approx(lam, abs=1e-15)
        if tag == ("zero", 0):
            assert out[nd] == pytest.approx(0.0, abs=1e-15)


def test_shapley_contraction_and_monotone(gamma_chain_small):
    rng = np.random.Generator(np.random.Philox(key=3))
    lam = 0.125
    for _ in range(50):
        f = rng.uniform(0, 1, len(gamma_chain_small))
        g = rng.uniform(0, 1, len(gamma_chain_small))
        tf = shapley_operator(gamma_chain_small, lam, f)
        tg = shapley_operator(gamma_chain_small, lam, g)
        assert np.abs(tf - tg).max() <= (1 - lam) * np.abs(f - g).max() + 1e-12
        th = shapley_operator(gamma_chain_small, lam, np.maximum(f, g))
        assert (th >= tf - 1e-12).all() and (th >= tg - 1e-12).all()


def test_shapley_rejects_bad_lambda(gamma_chain_small):
    with pytest.raises(ValueError):
        shapley_operator(gamma_chain_small, 0.0, np.zeros(len(gamma_chain_small)))
    with pytest.raises(ValueError):
        shapley_operator(gamma_chain_small, 1.5, np.zeros(len(gamma_chain_small)))


def test_kernel_and_numpy_sweeps_bit_identical(gamma_chain):
    arr = solver._arrays(gamma_chain)
    rng = np.random.Generator(np.random.Philox(key=4))
    for lam in (0.5, 2.0 ** -7):
        f = rng.uniform(0, 1, len(gamma_chain))
        via_kernel = shapley_operator(gamma_chain, lam, f)
        via_numpy = sweep_once_numpy(arr.gpay, arr.sense, arr.node_ptr, arr.eptr,
                                     arr.eprob, arr.enxt, lam, f)
        assert np.array_equal(via_kernel, via_numpy)


def test_discounted_absorbing_values(gamma_chain, gamma_spec):
    one_star = gamma_chain.locate(Belief.point("1*"))
    zero_star = gamma_chain.locate(Belief.point("0*"))
    for lam in (0.9, 0.1, 2.0 ** -6):
        vf, _ = discounted_value(gamma_chain, lam, 1e-10, want_profile=False)
        assert vf.values[one_star] == pytest.approx(1.0, abs=1e-9)
        assert vf.values[zero_star] == pytest.approx(0.0, abs=1e-9)
        assert vf.values.min() >= -1e-12 and vf.values.max() <= 1.0 + 1e-12
        assert vf.error_bound >= 0.0


def test_discounted_matches_closed_form(gamma_chain):
    for k in (5, 9):
        lam = 2.0 ** -k
        vf, profile = discounted_value(gamma_chain, lam, 1e-10)
        assert vf.residual <= 1e-10 * lam
        closed = analytics.threshold_value(analytics.ThresholdGame(lam))
        assert abs(vf.values[gamma_chain.root] - closed) <= 1e-6 + vf.error_bound
        pick = analytics.optimal_thresholds(analytics.ThresholdGame(lam))
        assert analytics.profile_thresholds(gamma_chain, profile) == \
               (pick.a_star, pick.b_star)


def test_discounted_lambda_one(gamma_chain):
    vf, _ = discounted_value(gamma_chain, 1.0, 1e-10, want_profile=False)
    # at full discounting only the current stage matters
    assert vf.values[gamma_chain.root] == pytest.approx(1.0, abs=1e-12)
    assert vf.iterations <= 3


def test_value_lipschitz_in_belief(gamma_chain, gamma_spec):
    vf, _ = discounted_value(gamma_chain, 2.0 ** -5, 1e-10, want_profile=False)
    for n, m in ((2, 4), (4, 8), (1, 3)):
        p = catalog.one_chain_belief(gamma_spec, n)
        q = catalog.one_chain_belief(gamma_spec, m)
        d1 = sum(abs(float(p.weight(k)) - float(q.weight(k)))
                 for k in gamma_spec.states)
        vp = vf.values[gamma_chain.locate(p)]
        vq = vf.values[gamma_chain.locate(q)]
        assert abs(vp - vq) <= gamma_spec.gmax * d1 + 1e-9


def test_extracted_profile_is_optimal(gamma_chain):
    lam = 2.0 ** -7
    vf, profile = discounted_value(gamma_chain, lam, 1e-10)
    vals = evaluate_profile(gamma_chain, profile, lam, 1e-10)
    assert np.abs(vals - vf.values).max() <= 2 * vf.error_bound + 1e-9


def test_evaluate_threshold_profile_matches_closed_form(gamma_chain):
    lam = 2.0 ** -9
    prof = threshold_profile(gamma_chain, 4, 4)
    vals = evaluate_profile(gamma_chain, prof, lam, 1e-10)
    expected = analytics.g_lambda(4, 4, lam)
    assert abs(vals[gamma_chain.root] - expected) <= 1e-8


def test_evaluate_profile_absorbing_and_never_quit(gamma_chain):
    lam = 2.0 ** -6
    prof = threshold_profile(gamma_chain, 4, None)  # player 2 never quits
    vals = evaluate_profile(gamma_chain, prof, lam, 1e-10)
    assert vals[gamma_chain.root] == pytest.approx(1.0, abs=1e-8)
    one_star = gamma_chain.locate(Belief.point("1*"))
    assert vals[one_star] == pytest.approx(1.0, abs=1e-8)


def test_finite_horizon_hand_values(gamma_chain, gamma_spec):
    vfs = finite_horizon(gamma_chain, 2)
    assert [vf.horizon for vf in vfs] == [1, 2]
    v1, v2 = vfs[0].values, vfs[1].values
    for n in (0, 1, 2, 5):
        assert v1[gamma_chain.locate(catalog.one_chain_belief(gamma_spec, n))] == 1.0
        assert v1[gamma_chain.locate(catalog.zero_chain_belief(gamma_spec, n))] == 0.0
    zero0 = gamma_chain.locate(catalog.zero_chain_belief(gamma_spec, 0))
    assert v2[zero0] == 0.0
    assert (v2 >= -1e-12).all() and (v2 <= 1.0 + 1e-12).all()


def test_finite_horizon_keep_last_only(gamma_chain):
    both = finite_horizon(gamma_chain, 7)
    last = finite_horizon(gamma_chain, 7, keep_all=False)
    assert len(both) == 7 and len(last) == 1
    assert np.array_equal(both[-1].values, last[0].values)


def test_neyman_gap_trivial_cases(gamma_chain, absorbing_chain):
    lhs, rhs = neyman_gap(gamma_chain, 12, 12, 1e-10)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    lhs, rhs = neyman_gap(absorbing_chain, 4, 16, 1e-10)
    assert lhs <= 1e-9 and rhs <= 1e-9
    with pytest.raises(ValueError):
        neyman_gap(gamma_chain, 0, 4)
    with pytest.raises(ValueError):
        neyman_gap(gamma_chain, 9, 4)


def test_neyman_gap_inequality(gamma_chain):
    lhs, rhs = neyman_gap(gamma_chain, 8, 64, 1e-10)
    assert lhs <= rhs + 1e-6


def test_value_gap_shrinks_along_the_even_sequence(gamma_chain, gamma_spec):
    # the advantage of a head start over the payoff-0 side washes out as the
    # discount vanishes
    root = gamma_chain.root
    gaps = {}
    for k in (5, 13):
        vf, _ = discounted_value(gamma_chain, 2.0 ** -k, 1e-10, want_profile=False)
        gaps[k] = [abs(vf.values[gamma_chain.locate(
            catalog.zero_chain_belief(gamma_spec, n))] - vf.values[root])
            for n in (0, 1, 2)]
    for n in range(3):
        assert gaps[13][n] < gaps[5][n]


def test_stretched_games_match_closed_form():
    # validates the whole stretched-game encoding: chain enumeration, quit
    # risks 2^-mr / 2^-2mr, and the strategic-form reduction on grids (r, 2r)
    lam = 2.0 ** -9
    for r in (2, 3):
        spec = catalog.gamma_r(r)
        chain = beliefs.reduce(spec, beliefs.initial_belief(spec), 512)
        vf, profile = discounted_value(chain, lam, 1e-10)
        tg = analytics.ThresholdGame(lam, r, 2 * r)
        closed = analytics.threshold_value(tg)
        assert abs(vf.values[chain.root] - closed) <= 1e-6 + vf.error_bound
        pick = analytics.optimal_thresholds(tg)
        assert analytics.profile_thresholds(chain, profile) == \
               (pick.a_star, pick.b_star)


def test_stretched_profile_payoffs_match_closed_form():
    spec = catalog.gamma_r(2)
    chain = beliefs.reduce(spec, beliefs.initial_belief(spec), 512)
    lam = 0.02
    for a, b in ((2, 4), (4, 4), (2, 8)):
        prof = threshold_profile(chain, a, b)
        vals = evaluate_profile(chain, prof, lam, 1e-10)
        assert abs(vals[chain.root] - analytics.g_lambda(a, b, lam)) <= 1e-8


def test_general_path_matches_kernel_path(gamma_chain_small):
    # force the uncontrolled code path and compare one sweep
    arr = solver._arrays(gamma_chain_small)
    lam = 0.25
    rng = np.random.Generator(np.random.Philox(key=5))
    f = rng.uniform(0, 1, len(gamma_chain_small))
    fast = shapley_operator(gamma_chain_small, lam, f)
    saved = arr.all_controlled
    arr.all_controlled = False
    try:
        slow = shapley_operator(gamma_chain_small, lam, f)
    finally:
        arr.all_controlled = saved
    assert np.abs(fast - slow).max() <= 1e-9
