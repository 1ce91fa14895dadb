"""Randomized games outside the catalog: exercises the uncontrolled solver
path (per-node LP), exact Bayes machinery on non-dyadic rationals, and the
optimal-profile/value consistency."""

from fractions import Fraction as F

import numpy as np
import pytest

from beliefgames import beliefs, model, solver
from beliefgames.beliefs import bayes_update, signal_marginal, state_marginal
from beliefgames.model import GameSpec, Outcome


def random_spec(rng) -> GameSpec:
    states = ("a", "b", "c", "stop")
    acts = ("x", "y")
    sigs = ("s", "t")
    kernel = {}
    payoff = {}
    cells = [(s, g) for s in states[:3] for g in sigs][:5] + [("stop", "s")]
    for k in states[:3]:
        for i in acts:
            for j in acts:
                payoff[(k, i, j)] = float(np.round(rng.uniform(0, 1), 3))
                weights = rng.integers(0, 4, size=6)
                if weights.sum() == 0:
                    weights[0] = 1
                total = int(weights.sum())
                kernel[(k, i, j)] = tuple(
                    Outcome(F(int(w), total), ns, sg)
                    for (ns, sg), w in zip(cells, weights) if w)
    for i in acts:
        for j in acts:
            payoff[("stop", i, j)] = 0.25
            kernel[("stop", i, j)] = (Outcome(F(1), "stop", "s"),)
    return GameSpec(states=states, actions1=acts, actions2=acts, signals=sigs,
                    payoff=payoff, kernel=kernel,
                    initial={"a": F(1, 3), "b": F(1, 3), "c": F(1, 3)},
                    absorbing=frozenset({"stop"}), name="fuzz")


@pytest.mark.parametrize("key", [11, 22, 33, 44])
def test_random_uncontrolled_game_consistency(key):
    rng = np.random.Generator(np.random.Philox(key=key))
    spec = random_spec(rng)
    assert model.validate(spec) == []

    chain = beliefs.reduce(spec, beliefs.initial_belief(spec), 150)
    for row in chain.transitions.values():
        assert sum(p for p, _, _ in row) == 1

    for nd in range(min(8, len(chain))):
        if nd in chain.boundary:
            continue
        p = chain.nodes[nd]
        for i in spec.actions1:
            for j in spec.actions2:
                mix = {}
                for sig, pr in signal_marginal(spec, p, i, j).items():
                    if pr == 0:
                        continue
                    for k, w in bayes_update(spec, p, i, j, sig).items():
                        mix[k] = mix.get(k, F(0)) + pr * w
                direct = state_marginal(spec, p, i, j)
                assert {k: v for k, v in mix.items() if v} == \
                       {k: v for k, v in direct.items() if v}

    lam = 0.2
    assert not solver._arrays(chain).all_controlled
    vf, prof = solver.discounted_value(chain, lam, 1e-10)
    vals = solver.evaluate_profile(chain, prof, lam, 1e-10)
    assert np.abs(vals - vf.values).max() <= 2 * vf.error_bound + 1e-8

    f = rng.uniform(0, 1, len(chain))
    g = rng.uniform(0, 1, len(chain))
    tf = solver.shapley_operator(chain, lam, f)
    tg = solver.shapley_operator(chain, lam, g)
    assert np.abs(tf - tg).max() <= (1 - lam) * np.abs(f - g).max() + 1e-12
