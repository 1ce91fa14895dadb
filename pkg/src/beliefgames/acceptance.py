"""Acceptance checks: one callable per criterion, shared by tests and the CLI.

Each criterion returns a CriterionResult with a pass flag and a short
human-readable detail line. Checks are self-contained (they build what they
need) and deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import analytics, beliefs, catalog, matrix_games, montecarlo, solver


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@lru_cache(maxsize=None)
def _gamma_chain(max_nodes: int) -> beliefs.BeliefChain:
    spec = catalog.gamma()
    return beliefs.reduce(spec, beliefs.initial_belief(spec), max_nodes)


def a1_cross_oracle() -> CriterionResult:
    """Iterated fixed point vs closed form at the chain root, four discounts."""
    chain = _gamma_chain(4096)
    parts, ok = [], True
    for k in (5, 9, 13, 17):
        lam = 2.0 ** -k
        vf, _ = solver.discounted_value(chain, lam, tol=1e-10, want_profile=False)
        closed = analytics.threshold_value(analytics.ThresholdGame(lam))
        diff = abs(float(vf.values[chain.root]) - closed)
        good = diff <= 1e-6 + vf.error_bound
        ok &= good
        parts.append(f"2^-{k}: |vi-closed|={diff:.2e} bound={vf.error_bound:.1e}")
    return CriterionResult("A1", ok, "; ".join(parts))


def a2_oscillation() -> CriterionResult:
    lam_vals = [analytics.threshold_value(analytics.ThresholdGame(2.0 ** -(4 * m + 1)))
                for m in range(3, 7)]
    mu_vals = [analytics.threshold_value(analytics.ThresholdGame(2.0 ** -(4 * m + 3)))
               for m in range(3, 7)]
    lam_gaps = [abs(v - 0.5) for v in lam_vals]
    mu_gaps = [abs(v - 5.0 / 9.0) for v in mu_vals]
    mono = all(g1 >= g2 for g1, g2 in zip(lam_gaps, lam_gaps[1:]))
    mono &= all(g1 >= g2 for g1, g2 in zip(mu_gaps, mu_gaps[1:]))
    ok = mono and lam_gaps[-1] <= 1e-3 and mu_gaps[-1] <= 5e-3
    detail = (f"|v(lam_6)-1/2|={lam_gaps[-1]:.2e}, |v(mu_6)-5/9|={mu_gaps[-1]:.2e}, "
              f"monotone={mono}")
    return CriterionResult("A2", ok, detail)


def a3_stretched_limits() -> CriterionResult:
    r = 2
    lam_gaps = [abs(analytics.threshold_value(
        analytics.ThresholdGame(2.0 ** -(8 * m + 1), r, 2 * r)) - 0.5)
        for m in range(2, 5)]
    target = (2.0 ** r + 2.0 ** -r) / (2.0 ** r + 2.0 ** -r + 2.0)
    mu_gaps = [abs(analytics.threshold_value(
        analytics.ThresholdGame(2.0 ** -(8 * m + 5), r, 2 * r)) - target)
        for m in range(2, 5)]
    mono = (all(a >= b for a, b in zip(lam_gaps, lam_gaps[1:]))
            and all(a >= b for a, b in zip(mu_gaps, mu_gaps[1:])))
    ok = mono and lam_gaps[-1] <= 5e-3 and mu_gaps[-1] <= 5e-3
    return CriterionResult(
        "A3", ok,
        f"r=2: |v-1/2|={lam_gaps[-1]:.2e}, |v-0.68|={mu_gaps[-1]:.2e}, monotone={mono}")


def a4_peak_location() -> CriterionResult:
    import math
    ok = True
    parts = []
    for lam in (1e-5, 1e-6, 1e-7):
        rs = analytics.r_star(lam)
        ratio = rs / math.sqrt(2.0 * lam)
        good = 0.9 <= ratio <= 1.1
        left = np.linspace(rs / 50.0, rs, 50)
        right = np.linspace(rs, min(1.0, 50.0 * rs), 51)[1:]
        fl = [analytics.f_hat(r, lam) for r in left]
        fr = [analytics.f_hat(r, lam) for r in right]
        good &= all(a < b for a, b in zip(fl, fl[1:]))
        good &= all(a > b for a, b in zip(fr, fr[1:]))
        ok &= good
        parts.append(f"lam={lam:g}: r*/sqrt(2lam)={ratio:.4f}")
    return CriterionResult("A4", ok, "; ".join(parts))


def a5_stopping_transform() -> CriterionResult:
    ok = True
    parts = []
    for n, lam, seed in ((4, 0.01, 11), (8, 0.001, 12)):
        ts = montecarlo.sample_stopping_times(n, 100_000, seed)
        x = (1.0 - lam) ** ts
        mean = float(x.mean())
        se = float(x.std(ddof=1) / np.sqrt(len(x)))
        exact = analytics.geometric_transform(n, lam)
        good = abs(mean - exact) <= 3.0 * se
        ok &= good
        parts.append(f"(n={n},lam={lam}): |emp-exact|={abs(mean - exact):.2e} 3se={3 * se:.2e}")
    return CriterionResult("A5", ok, "; ".join(parts))


def a6_horizon_vs_discount() -> CriterionResult:
    chain = _gamma_chain(512)
    ok = True
    parts = []
    for n0, n in ((8, 64), (16, 256)):
        lhs, rhs = solver.neyman_gap(chain, n0, n, tol=1e-10)
        good = lhs <= rhs + 1e-6
        ok &= good
        parts.append(f"(n0={n0},n={n}): lhs={lhs:.4f} rhs={rhs:.4f}")
    return CriterionResult("A6", ok, "; ".join(parts))


def a7_compact_game() -> CriterionResult:
    v1 = analytics.compact_value(2.0 ** -20).value
    v2 = analytics.compact_value(2.0 ** -21).value
    good1 = abs(v1 - 0.5) <= 2e-3
    good2 = abs(v2 - 5.0 / 9.0) <= 5e-3

    lam = 1.0 / 16.0
    xs = analytics.compact_value(lam).x_star
    grid = np.linspace(0.0, 1.0, 50)
    center = analytics.compact_payoff(xs, xs, lam)
    saddle = all(analytics.compact_payoff(x, xs, lam) <= center + 1e-12 for x in grid)
    saddle &= all(analytics.compact_payoff(xs, y, lam) >= center - 1e-12 for y in grid)

    ok = good1 and good2 and saddle
    detail = (f"|v(2^-20)-1/2|={abs(v1 - 0.5):.2e}; "
              f"|v(2^-21)-5/9|={abs(v2 - 5.0 / 9.0):.2e} (value={v2:.6f}); "
              f"saddle={saddle}")
    return CriterionResult("A7", ok, detail)


def a8_state_blind_equivalence() -> CriterionResult:
    lam = 2.0 ** -9
    res = montecarlo.simulate(catalog.state_blind(),
                            montecarlo.StrategySpec("state-blind-sigma"),
                            montecarlo.StrategySpec("state-blind-tau"),
                            lam, episodes=100_000, seed=2024)
    target = analytics.threshold_value(analytics.ThresholdGame(lam))
    diff = abs(res.mean - target)
    ok = diff <= 3.0 * res.se
    return CriterionResult("A8", ok, f"|mean-value|={diff:.2e} 3se={3 * res.se:.2e}")


def a9_solver_hygiene() -> CriterionResult:
    rng = np.random.Generator(np.random.Philox(key=99))
    ok = True
    worst = 0.0
    for trial in range(1000):
        shape = (2, 2) if trial % 2 == 0 else (3, 3)
        M = rng.integers(-2, 3, size=shape).astype(float)
        sol = matrix_games.solve(matrix_games.MatrixGame(M))
        ref = matrix_games.brute_force_value(M)
        worst = max(worst, abs(sol.value - ref))
        ok &= abs(sol.value - ref) <= 1e-9
        ok &= (sol.row_strategy @ M).min() >= sol.value - 1e-9
        ok &= (M @ sol.col_strategy).max() <= sol.value + 1e-9

    chain = _gamma_chain(512)
    lam = 2.0 ** -5
    contraction_ok = True
    for trial in range(100):
        f = rng.uniform(0.0, 1.0, len(chain))
        g = rng.uniform(0.0, 1.0, len(chain))
        tf = solver.shapley_operator(chain, lam, f)
        tg = solver.shapley_operator(chain, lam, g)
        contraction_ok &= (np.abs(tf - tg).max()
                           <= (1.0 - lam) * np.abs(f - g).max() + 1e-12)
    ok &= contraction_ok

    split_ok = _splitting_identity(chain)
    ok &= split_ok
    return CriterionResult(
        "A9", ok,
        f"matrix worst diff={worst:.2e}; contraction={contraction_ok}; "
        f"bayes splitting exact={split_ok}")


def _splitting_identity(chain: beliefs.BeliefChain) -> bool:
    spec = chain.spec
    for nd in range(len(chain)):
        if nd in chain.boundary:
            continue
        p = chain.nodes[nd]
        for i in spec.actions1:
            for j in spec.actions2:
                marg = beliefs.signal_marginal(spec, p, i, j)
                mix: dict[str, object] = {}
                for sig, prob in marg.items():
                    if prob == 0:
                        continue
                    post = beliefs.bayes_update(spec, p, i, j, sig)
                    for k, w in post.items():
                        mix[k] = mix.get(k, 0) + prob * w
                direct = beliefs.state_marginal(spec, p, i, j)
                if {k: v for k, v in mix.items() if v} != {k: v for k, v in direct.items() if v}:
                    return False
    return True


def a10_derivative_diagnostic() -> CriterionResult:
    report = analytics.derivative_check(r=4)
    frac = report.mu_compliance()
    failures = [s for s in report.mu_samples
                if s.normalized is not None and not s.breakpoint and not s.within]
    ok = report.regime_ok and frac >= 0.95 and report.mu_breakpoints <= 1
    detail = (f"m={report.m}, compliance={frac:.0%}, breakpoints={report.mu_breakpoints}"
              + (f", failures at {[f'{s.param:.3e}' for s in failures]}" if failures else ""))
    return CriterionResult("A10", ok, detail)


CRITERIA = {
    "A1": a1_cross_oracle,
    "A2": a2_oscillation,
    "A3": a3_stretched_limits,
    "A4": a4_peak_location,
    "A5": a5_stopping_transform,
    "A6": a6_horizon_vs_discount,
    "A7": a7_compact_game,
    "A8": a8_state_blind_equivalence,
    "A9": a9_solver_hygiene,
    "A10": a10_derivative_diagnostic,
}


def run_criteria(names=None) -> list[CriterionResult]:
    if names is None:
        names = list(CRITERIA)
    results = []
    for name in names:
        if name not in CRITERIA:
            raise KeyError(f"unknown criterion {name!r}")
        start = time.perf_counter()
        res = CRITERIA[name]()
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results
