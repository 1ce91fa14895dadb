"""Seeded Monte Carlo play of the signal-level games.

Episodes evolve the hidden state with the exact kernel while both players'
strategies read the public belief, updated by Bayes rule and memoized, so a
batch of episodes steps in lockstep over numpy arrays. Randomness is
counter-based: each stage draws from a generator keyed by (seed, stage),
indexed by the episode's position among the still-alive, so replaying or
parallelizing a stage cannot reorder the draws.

Discounted sums are truncated at the horizon; episodes that hit an
absorbing state add the truncated geometric tail in closed form and leave
the batch early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import analytics, catalog
from ._kernels import njit
from .beliefs import Belief, bayes_update, initial_belief
from .model import GameSpec

_TAIL_BIAS = 1e-9


@dataclass(frozen=True)
class StrategySpec:
    """Named strategy family plus its parameters (quit index, discount)."""

    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class SimResult:
    mean: float
    se: float
    episodes: int
    horizon: int
    seed: int
    absorb_stats: dict[str, float]


# ---------------------------------------------------------------------------
# counter-based RNG helpers

def _mix64(*parts: int) -> int:
    acc = 0x9E3779B97F4A7C15
    for p in parts:
        acc ^= (p & 0xFFFFFFFFFFFFFFFF) + 0x9E3779B97F4A7C15 + (acc << 6) + (acc >> 2)
        acc &= 0xFFFFFFFFFFFFFFFF
        acc = (acc ^ (acc >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
        acc = (acc ^ (acc >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
        acc ^= acc >> 31
    return acc


def _stage_generator(seed: int, stage: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_mix64(seed, stage)))


@njit(cache=True)
def _mix_u64(z):
    # splitmix64 finalizer (bijective avalanche)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _stopping_times_kernel(n, count, seed):
    golden = np.uint64(0x9E3779B97F4A7C15)
    out = np.empty(count, dtype=np.int64)
    for s in range(count):
        # per-sample stream: flip t draws mix(base + golden*t); hashing the
        # base decorrelates streams (linear offsets would make them overlap)
        base = _mix_u64(np.uint64(seed) + golden * np.uint64(s + 1))
        run = 0
        t = 0
        while run < n:
            t += 1
            z = _mix_u64(base + golden * np.uint64(t))
            if z >> np.uint64(63):
                run += 1
            else:
                run = 0
        out[s] = t
    return out


def sample_stopping_times(n: int, count: int, seed: int) -> np.ndarray:
    """Fair-coin flips until the first run of n consecutive heads, per sample."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _stopping_times_kernel(n, count, seed & 0xFFFFFFFFFFFFFFFF)


def sample_stopping_time(n: int, seed: int) -> int:
    return int(sample_stopping_times(n, 1, seed)[0])


# ---------------------------------------------------------------------------
# strategies

class _Compiled:
    """Per-belief action rows; informed strategies also read the true state."""

    def __init__(self, fn, n_states, n_actions):
        self._fn = fn
        self._n_states = n_states
        self._n_actions = n_actions

    def rows(self, belief: Belief) -> np.ndarray:
        out = self._fn(belief)
        if out.ndim == 1:
            out = np.broadcast_to(out, (self._n_states, self._n_actions)).copy()
        return out


def _require_actions(actions: tuple[str, ...], needed: tuple[str, ...], who: str):
    missing = [a for a in needed if a not in actions]
    if missing:
        raise ValueError(f"strategy needs actions {missing} for {who}")


def _pure(actions, name) -> np.ndarray:
    row = np.zeros(len(actions))
    row[actions.index(name)] = 1.0
    return row


def _threshold_rule(spec: GameSpec, side: str, index: int | None, actions):
    quit_row = _pure(actions, "Q")
    cont_row = _pure(actions, "C")

    def fn(belief: Belief) -> np.ndarray:
        tag = catalog.classify_chain_belief(spec, belief)
        if (index is not None and tag is not None and tag[0] == side
                and tag[1] >= index):
            return quit_row
        return cont_row

    return fn


def _risk_ceiling_rule(plus_state: str, index: int, mix_row, quit_row):
    # quit once the conditional weight of the drifted state reaches 1 - 2^-index
    threshold = 1 - Fraction(1, 2 ** index)

    def fn(belief: Belief) -> np.ndarray:
        alive = 1 - belief.weight("0*") - belief.weight("1*")
        if alive == 0:
            return mix_row
        if belief.weight(plus_state) / alive >= threshold:
            return quit_row
        return mix_row

    return fn


def compile_strategy(spec: GameSpec, strat: StrategySpec, player: int,
                     lam: float) -> _Compiled:
    actions = spec.actions1 if player == 1 else spec.actions2
    n_k = len(spec.states)
    params = dict(strat.params)
    kind = strat.kind

    def auto_a() -> int:
        return analytics.optimal_thresholds(analytics.ThresholdGame(lam)).a_star

    def auto_b() -> int:
        return analytics.optimal_thresholds(analytics.ThresholdGame(lam)).b_star

    if kind == "threshold-s":
        if player != 1:
            raise ValueError("threshold-s is a player-1 strategy")
        _require_actions(actions, ("C", "Q"), "threshold-s")
        fn = _threshold_rule(spec, "zero", params.get("a", None), actions)
    elif kind == "threshold-t":
        if player != 2:
            raise ValueError("threshold-t is a player-2 strategy")
        _require_actions(actions, ("C", "Q"), "threshold-t")
        fn = _threshold_rule(spec, "one", params.get("b", None), actions)
    elif kind == "state-blind-sigma":
        _require_actions(actions, ("T", "B", "Q"), "state-blind-sigma")
        a = params.get("a", auto_a())
        mix = (_pure(actions, "T") + _pure(actions, "B")) / 2.0
        fn = _risk_ceiling_rule("0+", a, mix, _pure(actions, "Q"))
    elif kind == "state-blind-tau":
        _require_actions(actions, ("L", "R", "Q"), "state-blind-tau")
        b = params.get("b", auto_b())
        mix = (_pure(actions, "L") + _pure(actions, "R")) / 2.0
        fn = _risk_ceiling_rule("1+", b, mix, _pure(actions, "Q"))
    elif kind == "informed-sigma":
        _require_actions(actions, ("T", "B", "Q"), "informed-sigma")
        a = params.get("a", auto_a())
        root = math.sqrt(lam)
        state1 = (1.0 - root) * _pure(actions, "T") + root * _pure(actions, "B")
        mix = (_pure(actions, "T") + _pure(actions, "B")) / 2.0
        zero_rule = _risk_ceiling_rule("0+", a, mix, _pure(actions, "Q"))

        def fn(belief: Belief) -> np.ndarray:
            alive = 1 - belief.weight("0*") - belief.weight("1*")
            if alive == 0:
                return state1
            if belief.weight("1") / alive >= Fraction(1, 2):
                return state1
            return zero_rule(belief)
    elif kind == "informed-tau":
        _require_actions(actions, ("L", "R"), "informed-tau")
        root = math.sqrt(lam)
        state1 = (1.0 - root) * _pure(actions, "L") + root * _pure(actions, "R")
        mix = (_pure(actions, "L") + _pure(actions, "R")) / 2.0
        table = np.tile(mix, (n_k, 1))
        for idx, k in enumerate(spec.states):
            if k == "1":
                table[idx] = state1
            elif k in ("1*", "0*"):
                table[idx] = _pure(actions, actions[0])

        def fn(_belief: Belief) -> np.ndarray:
            return table
    elif kind == "custom":
        table = params["table"]
        default = np.asarray(params.get("default", _pure(actions, actions[0])),
                             dtype=float)

        def fn(belief: Belief) -> np.ndarray:
            row = table.get(catalog.node_label(spec, belief))
            if row is None:
                row = table.get(belief.label())
            if row is None:
                return default
            return np.array([row.get(a, 0.0) for a in actions])
    else:
        raise ValueError(f"unknown strategy kind {strat.kind!r}")

    return _Compiled(fn, n_k, len(actions))


# ---------------------------------------------------------------------------
# episode engine

class _BeliefTable:
    """Lazily enumerated public beliefs with memoized Bayes transitions
    and per-belief strategy rows (cumulative, per true state)."""

    def __init__(self, spec: GameSpec, sigma: _Compiled, tau: _Compiled):
        self.spec = spec
        self.sigma = sigma
        self.tau = tau
        self.n_k = len(spec.states)
        self.n_i = len(spec.actions1)
        self.n_j = len(spec.actions2)
        self.n_s = len(spec.signals)
        self.beliefs: list[Belief] = []
        self.index: dict[Belief, int] = {}
        cap = 64
        self.trans = np.full((cap, self.n_i, self.n_j, self.n_s), -1, dtype=np.int64)
        self.sig_cum = np.zeros((cap, self.n_k, self.n_i))
        self.tau_cum = np.zeros((cap, self.n_k, self.n_j))

    def _grow(self, need: int):
        cap = self.trans.shape[0]
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        for name in ("trans", "sig_cum", "tau_cum"):
            old = getattr(self, name)
            fresh = (np.full((new_cap,) + old.shape[1:], -1, dtype=old.dtype)
                     if name == "trans" else np.zeros((new_cap,) + old.shape[1:]))
            fresh[:cap] = old
            setattr(self, name, fresh)

    def register(self, belief: Belief) -> int:
        got = self.index.get(belief)
        if got is not None:
            return got
        nd = len(self.beliefs)
        self._grow(nd + 1)
        self.beliefs.append(belief)
        self.index[belief] = nd
        srow = np.cumsum(self.sigma.rows(belief), axis=-1)
        trow = np.cumsum(self.tau.rows(belief), axis=-1)
        srow[..., -1] = 1.0
        trow[..., -1] = 1.0
        self.sig_cum[nd] = srow
        self.tau_cum[nd] = trow
        return nd

    def fill_transitions(self, nodes, iact, jact, sigs):
        found = self.trans[nodes, iact, jact, sigs]
        miss = found < 0
        if not miss.any():
            return found
        spec = self.spec
        keys = sorted(set(zip(nodes[miss].tolist(), iact[miss].tolist(),
                              jact[miss].tolist(), sigs[miss].tolist())))
        for nd, ii, jj, ss in keys:
            nxt = bayes_update(spec, self.beliefs[nd], spec.actions1[ii],
                               spec.actions2[jj], spec.signals[ss])
            self.trans[nd, ii, jj, ss] = self.register(nxt)
        return self.trans[nodes, iact, jact, sigs]


def _dense_kernel(spec: GameSpec):
    n_k, n_i, n_j = len(spec.states), len(spec.actions1), len(spec.actions2)
    max_out = max(len(row) for row in spec.kernel.values())
    cum = np.ones((n_k, n_i, n_j, max_out))
    nxt = np.zeros((n_k, n_i, n_j, max_out), dtype=np.int64)
    sig = np.zeros((n_k, n_i, n_j, max_out), dtype=np.int64)
    gpay = np.zeros((n_k, n_i, n_j))
    for ki, k in enumerate(spec.states):
        for ii, i in enumerate(spec.actions1):
            for jj, j in enumerate(spec.actions2):
                gpay[ki, ii, jj] = spec.payoff[(k, i, j)]
                acc = 0.0
                row = spec.kernel[(k, i, j)]
                for o, (prob, nk, ns) in enumerate(row):
                    acc += float(prob)
                    cum[ki, ii, jj, o] = acc
                    nxt[ki, ii, jj, o] = spec.state_index[nk]
                    sig[ki, ii, jj, o] = spec.signal_index[ns]
                cum[ki, ii, jj, len(row) - 1] = 1.0
                nxt[ki, ii, jj, len(row):] = nxt[ki, ii, jj, len(row) - 1]
                sig[ki, ii, jj, len(row):] = sig[ki, ii, jj, len(row) - 1]
    return gpay, cum, nxt, sig


def default_horizon(lam: float) -> int:
    if lam >= 1.0:
        return 1
    return int(math.ceil(math.log(_TAIL_BIAS) / math.log1p(-lam)))


def simulate(spec: GameSpec, sigma: StrategySpec, tau: StrategySpec, lam: float,
             episodes: int, horizon: int | None = None, seed: int = 0) -> SimResult:
    """Mean discounted payoff under the two strategies, with standard error.

    Reproducible bit-for-bit for a fixed seed. The per-episode discounted
    sum is truncated at the horizon, which must satisfy
    (1-lam)^horizon <= 1e-9.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if horizon is None:
        horizon = default_horizon(lam)
    elif lam < 1.0 and (1.0 - lam) ** horizon > _TAIL_BIAS:
        raise ValueError(f"horizon {horizon} too small for lam={lam:g}")

    table = _BeliefTable(spec, compile_strategy(spec, sigma, 1, lam),
                         compile_strategy(spec, tau, 2, lam))
    gpay, kcum, knxt, ksig = _dense_kernel(spec)
    isabs = np.array([k in spec.absorbing for k in spec.states])
    quit1 = spec.a1_index.get("Q", -1)
    quit2 = spec.a2_index.get("Q", -1)
    abs_names = sorted(spec.absorbing)

    root = table.register(initial_belief(spec))
    init_states = list(spec.initial)
    init_probs = np.array([float(p) for p in spec.initial.values()])
    init_ids = np.array([spec.state_index[k] for k in init_states])
    draw = _stage_generator(seed, 0).random(episodes)
    if len(init_states) > 1:
        cum = np.cumsum(init_probs)
        k_now = init_ids[(draw[:, None] > cum[:-1][None, :]).sum(axis=1)]
    else:
        k_now = np.full(episodes, init_ids[0], dtype=np.int64)
    node = np.full(episodes, root, dtype=np.int64)
    acc = np.zeros(episodes)
    absorbed_in = np.full(episodes, -1, dtype=np.int64)
    p1_quit_done = np.zeros(episodes, dtype=bool)
    p2_quit_done = np.zeros(episodes, dtype=bool)
    p1_first_abs = np.zeros(episodes, dtype=bool)
    p2_first_abs = np.zeros(episodes, dtype=bool)

    oml = 1.0 - lam
    tail_h = oml ** horizon
    tail = 1.0  # (1-lam)^(t-1)
    g_state = np.array([spec.payoff[(k, spec.actions1[0], spec.actions2[0])]
                        for k in spec.states])

    idx = np.arange(episodes)
    for t in range(1, horizon + 1):
        if idx.size == 0:
            break
        done_now = isabs[k_now[idx]]
        if done_now.any():
            sel = idx[done_now]
            acc[sel] += (tail - tail_h) * g_state[k_now[sel]]
            absorbed_in[sel] = k_now[sel]
            idx = idx[~done_now]
            if idx.size == 0:
                break
        # draws are keyed by (seed, stage, slot, position among the alive)
        u = _stage_generator(seed, t).random((3, idx.size))
        ks = k_now[idx]
        nds = node[idx]
        i_act = (u[0][:, None] > table.sig_cum[nds, ks][:, :-1]).sum(axis=1)
        j_act = (u[1][:, None] > table.tau_cum[nds, ks][:, :-1]).sum(axis=1)
        acc[idx] += lam * tail * gpay[ks, i_act, j_act]
        out = (u[2][:, None] > kcum[ks, i_act, j_act][:, :-1]).sum(axis=1)
        k_next = knxt[ks, i_act, j_act, out]
        s_obs = ksig[ks, i_act, j_act, out]

        if quit1 >= 0:
            first = (i_act == quit1) & ~p1_quit_done[idx]
            if first.any():
                sel = idx[first]
                p1_first_abs[sel] = (k_next[first] == spec.state_index.get("0*", -2))
                p1_quit_done[sel] = True
        if quit2 >= 0:
            first = (j_act == quit2) & ~p2_quit_done[idx]
            if first.any():
                sel = idx[first]
                p2_first_abs[sel] = (k_next[first] == spec.state_index.get("1*", -2))
                p2_quit_done[sel] = True

        node[idx] = table.fill_transitions(nds, i_act, j_act, s_obs)
        k_now[idx] = k_next
        tail *= oml

    stats = {name: float(np.mean(absorbed_in == spec.state_index[name]))
             for name in abs_names}
    stats["none"] = float(np.mean(absorbed_in < 0))
    if quit1 >= 0:
        stats["p1_first_quit_absorbed"] = float(p1_first_abs.mean())
    if quit2 >= 0:
        stats["p2_first_quit_absorbed"] = float(p2_first_abs.mean())

    mean = float(acc.mean())
    se = float(acc.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return SimResult(mean=mean, se=se, episodes=episodes, horizon=horizon,
                     seed=seed, absorb_stats=stats)


# ---------------------------------------------------------------------------
# the one-informed-player profile

def informed_profile_value(lam: float, a: int | None = None) -> float:
    """Exact discounted payoff of the informed-game strategy pair from state 1.

    In state 1 the pair exits to the 0-side at rate 2*sqrt(lam)(1-sqrt(lam))
    per stage and absorbs the payoff-1 state at rate lam; a 0-phase entered
    with quit index a salvages the discounted weight f_lambda(a). Solving the
    two-phase cycle gives the closed form below, the oracle the simulator is
    tested against.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if a is None:
        a = analytics.optimal_thresholds(analytics.ThresholdGame(lam)).a_star
    e = math.sqrt(lam)
    f = analytics.f_lambda(a, lam)
    stay = (1.0 - e) ** 2
    exit_rate = 2.0 * e * (1.0 - e)
    denom = 1.0 - (1.0 - lam) * (stay + exit_rate * f)
    return lam * (2.0 - lam) / denom


def informed_eval(lam: float, episodes: int, seed: int = 0) -> SimResult:
    """Monte Carlo payoff of the informed-game pair started in state 1.

    Along this profile's play path the public belief is either the known
    state 1 or a dyadic mixture inside the 0-side, where the informed
    player's mixing is state-independent, so the uninformed Bayes update is
    exact despite the information asymmetry.
    """
    if lam > 2.0 ** -6:
        raise ValueError("informed_eval expects lam <= 2^-6")
    spec = catalog.one_informed()
    return simulate(spec, StrategySpec("informed-sigma"),
                    StrategySpec("informed-tau"), lam, episodes, seed=seed)
