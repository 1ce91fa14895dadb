"""Bayes updating of public beliefs and the reduction to a game on belief space.

The hidden-state game is equivalent to a perfect-observation game whose
states are the common posteriors over the hidden state. `reduce` enumerates
the posteriors reachable from a root belief under all pure action pairs,
dedupes them by exact rational equality, and truncates the enumeration at a
node cap, clamping unexpanded beliefs into absorbing self-loops.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .model import GameSpec, ONE, ZERO, format_prob


class ImpossibleObservationError(ValueError):
    """Raised when conditioning on a signal of zero probability."""


class EnumerationOverflowError(RuntimeError):
    """Raised when exact enumeration was demanded but the node cap was hit."""


class Belief:
    """Exact rational probability vector over states, canonical and hashable."""

    __slots__ = ("_items", "_hash")

    def __init__(self, weights: Mapping[str, Fraction]):
        items = []
        total = ZERO
        for k in sorted(weights):
            w = weights[k]
            if w < 0:
                raise ValueError(f"negative belief weight for {k!r}")
            if w != 0:
                items.append((k, w))
                total += w
        if total != ONE:
            raise ValueError(f"belief weights sum to {format_prob(total)}, not 1")
        self._items = tuple(items)
        self._hash = hash(self._items)

    @classmethod
    def point(cls, state: str) -> "Belief":
        return cls({state: ONE})

    def items(self) -> tuple[tuple[str, Fraction], ...]:
        return self._items

    def weight(self, state: str) -> Fraction:
        for k, w in self._items:
            if k == state:
                return w
        return ZERO

    def support(self) -> frozenset[str]:
        return frozenset(k for k, _ in self._items)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self._items)

    def __eq__(self, other) -> bool:
        return isinstance(other, Belief) and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {format_prob(w)}" for k, w in self._items)
        return f"Belief({{{body}}})"

    def label(self) -> str:
        return " + ".join(f"{format_prob(w)}*{k}" for k, w in self._items)


def initial_belief(spec: GameSpec) -> Belief:
    return Belief({k: p for k, p in spec.initial.items()})


def signal_marginal(spec: GameSpec, p: Belief, a1: str, a2: str) -> dict[str, Fraction]:
    """Exact distribution of the public signal under belief p and actions (a1, a2)."""
    marg: dict[str, Fraction] = {}
    for k, pk in p.items():
        for prob, _nxt, sig in spec.kernel[(k, a1, a2)]:
            if prob != 0:
                marg[sig] = marg.get(sig, ZERO) + pk * prob
    return marg


def state_marginal(spec: GameSpec, p: Belief, a1: str, a2: str) -> dict[str, Fraction]:
    """Exact one-step distribution of the next state (signal summed out)."""
    marg: dict[str, Fraction] = {}
    for k, pk in p.items():
        for prob, nxt, _sig in spec.kernel[(k, a1, a2)]:
            if prob != 0:
                marg[nxt] = marg.get(nxt, ZERO) + pk * prob
    return marg


def bayes_update(spec: GameSpec, p: Belief, a1: str, a2: str, signal: str) -> Belief:
    """Posterior over the next state after playing (a1, a2) and observing signal."""
    joint: dict[str, Fraction] = {}
    total = ZERO
    for k, pk in p.items():
        for prob, nxt, sig in spec.kernel[(k, a1, a2)]:
            if sig == signal and prob != 0:
                joint[nxt] = joint.get(nxt, ZERO) + pk * prob
                total += pk * prob
    if total == 0:
        raise ImpossibleObservationError(
            f"signal {signal!r} has zero probability under ({a1}, {a2})")
    return Belief({k: w / total for k, w in joint.items()})


@dataclass
class BeliefChain:
    """Enumerated belief game: nodes, transitions and payoffs on belief space.

    transitions maps (node, i_idx, j_idx) to ((prob, next_node, sig_idx), ...)
    with exact rational probabilities summing to 1. Boundary nodes were not
    expanded; their rows are self-loops and truncation_bound is a value-error
    allowance of (total clamped reach probability) * 2 * max|g|.
    """

    spec: GameSpec
    nodes: list[Belief]
    transitions: dict[tuple[int, int, int], tuple[tuple[Fraction, int, int], ...]]
    payoff: np.ndarray
    boundary: frozenset[int]
    truncation_bound: float
    reach: list[float]
    root: int = 0
    _index: dict[Belief, int] = field(default_factory=dict, repr=False)
    _arrays: object = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_actions1(self) -> int:
        return len(self.spec.actions1)

    @property
    def n_actions2(self) -> int:
        return len(self.spec.actions2)

    def locate(self, p: Belief) -> int | None:
        return self._index.get(p)

    def row(self, node: int, a1: str, a2: str):
        key = (node, self.spec.a1_index[a1], self.spec.a2_index[a2])
        return self.transitions[key]

    def independence_flags(self, node: int) -> tuple[bool, bool]:
        """(independent of player 1's action, independent of player 2's action)."""
        n_i, n_j = self.n_actions1, self.n_actions2
        t = self.transitions
        g = self.payoff
        indep_i = all(
            t[(node, i, j)] == t[(node, 0, j)] and g[node, i, j] == g[node, 0, j]
            for i in range(n_i) for j in range(n_j))
        indep_j = all(
            t[(node, i, j)] == t[(node, i, 0)] and g[node, i, j] == g[node, i, 0]
            for i in range(n_i) for j in range(n_j))
        return indep_i, indep_j

    def controller(self, node: int) -> int:
        """1 if only player 1's action matters, 2 for player 2, 0 if both do."""
        indep_i, indep_j = self.independence_flags(node)
        if indep_j:
            return 1
        if indep_i:
            return 2
        return 0


def _node_payoffs(spec: GameSpec, p: Belief) -> np.ndarray:
    out = np.empty((len(spec.actions1), len(spec.actions2)))
    for ii, i in enumerate(spec.actions1):
        for jj, j in enumerate(spec.actions2):
            out[ii, jj] = sum(float(pk) * spec.payoff[(k, i, j)] for k, pk in p.items())
    return out


def reduce(spec: GameSpec, root: Belief, max_nodes: int = 4096,
           tail_mass: float | None = None) -> BeliefChain:
    """Enumerate beliefs reachable from root; truncate at max_nodes.

    tail_mass=None (default) relies on the node cap alone. tail_mass=0.0
    demands exact enumeration and raises EnumerationOverflowError if the cap
    forces truncation. tail_mass>0 additionally stops expanding beliefs whose
    best-path reach probability is at or below the threshold.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be >= 1")
    if tail_mass is not None and not (0.0 <= tail_mass < 1.0):
        raise ValueError("tail_mass must lie in [0, 1)")

    a1s, a2s = spec.actions1, spec.actions2
    sig_idx = spec.signal_index

    nodes: list[Belief] = [root]
    index: dict[Belief, int] = {root: 0}
    reach: list[float] = [1.0]
    transitions: dict[tuple[int, int, int], tuple[tuple[Fraction, int, int], ...]] = {}
    clamped: set[int] = set()
    queue: deque[int] = deque([0])

    while queue:
        u = queue.popleft()
        p = nodes[u]
        if tail_mass is not None and tail_mass > 0.0 and u != 0 and reach[u] <= tail_mass:
            clamped.add(u)
            continue

        rows: dict[tuple[int, int], list[tuple[Fraction, Belief, int]]] = {}
        fresh: dict[Belief, None] = {}
        for ii, i in enumerate(a1s):
            for jj, j in enumerate(a2s):
                row = []
                for sig, prob in signal_marginal(spec, p, i, j).items():
                    if prob == 0:
                        continue
                    q = bayes_update(spec, p, i, j, sig)
                    row.append((prob, q, sig_idx[sig]))
                    if q not in index:
                        fresh[q] = None
                rows[(ii, jj)] = row

        if len(nodes) + len(fresh) > max_nodes:
            clamped.add(u)
            continue

        for q in fresh:
            index[q] = len(nodes)
            nodes.append(q)
            reach.append(0.0)
            queue.append(index[q])
        for (ii, jj), row in rows.items():
            out = []
            for prob, q, s in row:
                v = index[q]
                rv = reach[u] * float(prob)
                if v != 0 and rv > reach[v]:
                    reach[v] = rv
                out.append((prob, v, s))
            transitions[(u, ii, jj)] = tuple(out)

    if tail_mass == 0.0 and clamped:
        raise EnumerationOverflowError(
            f"exact enumeration needs more than {max_nodes} nodes")

    for b in clamped:
        loop = ((ONE, b, 0),)
        for ii in range(len(a1s)):
            for jj in range(len(a2s)):
                transitions[(b, ii, jj)] = loop

    payoff = np.stack([_node_payoffs(spec, p) for p in nodes])
    bound = min(1.0, sum(reach[b] for b in clamped)) * 2.0 * spec.gmax if clamped else 0.0

    return BeliefChain(
        spec=spec, nodes=nodes, transitions=transitions, payoff=payoff,
        boundary=frozenset(clamped), truncation_bound=bound, reach=reach,
        root=0, _index=index,
    )


def locate(chain: BeliefChain, p: Belief) -> int | None:
    return chain.locate(p)


def chain_to_dict(chain: BeliefChain) -> dict:
    spec = chain.spec
    trans = []
    for node in range(len(chain)):
        for ii, i in enumerate(spec.actions1):
            for jj, j in enumerate(spec.actions2):
                trans.append({
                    "node": node, "a1": i, "a2": j,
                    "outcomes": [
                        {"prob": format_prob(prob), "next": nxt,
                         "signal": spec.signals[s]}
                        for prob, nxt, s in chain.transitions[(node, ii, jj)]
                    ],
                })
    return {
        "game": spec.name,
        "nodes": [{k: format_prob(w) for k, w in b.items()} for b in chain.nodes],
        "root": chain.root,
        "boundary": sorted(chain.boundary),
        "truncation_bound": chain.truncation_bound,
        "transitions": trans,
    }
