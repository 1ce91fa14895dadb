"""Core representation of finite zero-sum repeated games with public signals.

A game is given by a finite state space, finite action sets for both
players, a finite public signal set, a payoff function on
(state, action1, action2), and a transition kernel mapping each
(state, action1, action2) to a distribution over (next state, signal).
Kernel probabilities are exact rationals; payoffs are floats in [-1, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_SUM_TOL = 1e-12


def parse_prob(value) -> Fraction:
    """Parse a probability given as "num/den", a decimal string, or a number."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # decimal semantics for JSON floats, not binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot parse probability from {value!r}")


def format_prob(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)


class Outcome(NamedTuple):
    prob: Fraction
    next_state: str
    signal: str


@dataclass(frozen=True)
class Distribution:
    """Float-weighted distribution over identifiers (sums to 1 within 1e-12)."""

    weights: Mapping[str, float]

    def validate(self, support: Iterable[str] | None = None) -> None:
        total = 0.0
        for key, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight for {key!r}")
            if support is not None and key not in support:
                raise ValueError(f"unknown identifier {key!r}")
            total += w
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")

    def items(self):
        return self.weights.items()

    def __getitem__(self, key: str) -> float:
        return self.weights.get(key, 0.0)

    @classmethod
    def point(cls, key: str) -> "Distribution":
        return cls({key: 1.0})

    @classmethod
    def uniform(cls, keys: Iterable[str]) -> "Distribution":
        keys = list(keys)
        return cls({k: 1.0 / len(keys) for k in keys})


@dataclass(frozen=True)
class GameSpec:
    """Immutable game description; validate() reports invariant violations."""

    states: tuple[str, ...]
    actions1: tuple[str, ...]
    actions2: tuple[str, ...]
    signals: tuple[str, ...]
    payoff: Mapping[tuple[str, str, str], float]
    kernel: Mapping[tuple[str, str, str], tuple[Outcome, ...]]
    initial: Mapping[str, Fraction]
    absorbing: frozenset[str] = frozenset()
    name: str = ""
    payoff_scale: float = 1.0

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {k: n for n, k in enumerate(self.states)}

    @cached_property
    def a1_index(self) -> dict[str, int]:
        return {a: n for n, a in enumerate(self.actions1)}

    @cached_property
    def a2_index(self) -> dict[str, int]:
        return {a: n for n, a in enumerate(self.actions2)}

    @cached_property
    def signal_index(self) -> dict[str, int]:
        return {a: n for n, a in enumerate(self.signals)}

    @cached_property
    def gmax(self) -> float:
        return max(abs(v) for v in self.payoff.values())

    def payoff_of(self, state: str, a1: str, a2: str) -> float:
        return self.payoff[(state, a1, a2)]

    def kernel_of(self, state: str, a1: str, a2: str) -> tuple[Outcome, ...]:
        return self.kernel[(state, a1, a2)]


def validate(spec: GameSpec) -> list[str]:
    """Return all invariant violations (empty list when the spec is sound)."""
    bad: list[str] = []
    states = set(spec.states)
    signals = set(spec.signals)

    for k in spec.absorbing:
        if k not in states:
            bad.append(f"absorbing state {k!r} not declared")

    for k in spec.states:
        for i in spec.actions1:
            for j in spec.actions2:
                key = (k, i, j)
                row = spec.kernel.get(key)
                if row is None:
                    bad.append(f"kernel row missing for {key}")
                    continue
                total = ZERO
                for prob, nxt, sig in row:
                    if prob < 0:
                        bad.append(f"negative probability in kernel row {key}")
                    if nxt not in states:
                        bad.append(f"kernel row {key} references unknown state {nxt!r}")
                    if sig not in signals:
                        bad.append(f"kernel row {key} references unknown signal {sig!r}")
                    total += prob
                if total != ONE:
                    bad.append(f"kernel row {key} sums to {format_prob(total)}")
                if key not in spec.payoff:
                    bad.append(f"payoff missing for {key}")
                elif abs(spec.payoff[key]) > 1.0 + 1e-15:
                    bad.append(f"payoff at {key} outside [-1, 1]")

    for k in spec.absorbing & states:
        rows = [spec.kernel.get((k, i, j)) for i in spec.actions1 for j in spec.actions2]
        pays = {spec.payoff.get((k, i, j)) for i in spec.actions1 for j in spec.actions2}
        if len(pays) != 1:
            bad.append(f"absorbing state {k!r} has action-dependent payoff")
        sigs = set()
        for row in rows:
            if row is None:
                continue
            if len(row) != 1 or row[0].prob != ONE or row[0].next_state != k:
                bad.append(f"absorbing state {k!r} has a non-self-loop kernel row")
                break
            sigs.add(row[0].signal)
        if len(sigs) > 1:
            bad.append(f"absorbing state {k!r} emits more than one signal")

    total = ZERO
    for k, p in spec.initial.items():
        if k not in states:
            bad.append(f"initial distribution references unknown state {k!r}")
        if p < 0:
            bad.append(f"initial probability of {k!r} is negative")
        total += p
    if total != ONE:
        bad.append(f"initial distribution sums to {format_prob(total)}")

    return bad


def _weights(dist) -> Iterable[tuple[str, object]]:
    if hasattr(dist, "items"):
        return dist.items()
    raise TypeError(f"expected a distribution-like mapping, got {type(dist)!r}")


def extend_payoff(spec: GameSpec, p, x, y) -> float:
    """Multilinear extension sum_{k,i,j} p(k) x(i) y(j) g(k,i,j)."""
    total = 0.0
    for k, pk in _weights(p):
        if k not in spec.state_index:
            raise ValueError(f"unknown state {k!r}")
        if not pk:
            continue
        for i, xi in _weights(x):
            if i not in spec.a1_index:
                raise ValueError(f"unknown action {i!r} for player 1")
            if not xi:
                continue
            for j, yj in _weights(y):
                if j not in spec.a2_index:
                    raise ValueError(f"unknown action {j!r} for player 2")
                if not yj:
                    continue
                total += float(pk) * float(xi) * float(yj) * spec.payoff[(k, i, j)]
    return total


# ---------------------------------------------------------------------------
# Game-spec file format (JSON)

def game_to_dict(spec: GameSpec) -> dict:
    payoffs: list[dict] = []
    for k in spec.states:
        vals = {spec.payoff[(k, i, j)] for i in spec.actions1 for j in spec.actions2}
        if len(vals) == 1:
            payoffs.append({"state": k, "value": vals.pop()})
        else:
            for i in spec.actions1:
                for j in spec.actions2:
                    payoffs.append({"state": k, "a1": i, "a2": j,
                                    "value": spec.payoff[(k, i, j)]})
    kernel = []
    for k in spec.states:
        for i in spec.actions1:
            for j in spec.actions2:
                kernel.append({
                    "state": k, "a1": i, "a2": j,
                    "outcomes": [{"prob": format_prob(o.prob), "next": o.next_state,
                                  "signal": o.signal}
                                 for o in spec.kernel[(k, i, j)]],
                })
    return {
        "name": spec.name,
        "states": list(spec.states),
        "actions1": list(spec.actions1),
        "actions2": list(spec.actions2),
        "signals": list(spec.signals),
        "payoffs": payoffs,
        "kernel": kernel,
        "initial": {k: format_prob(p) for k, p in spec.initial.items() if p != 0},
        "absorbing": sorted(spec.absorbing),
    }


def game_from_dict(data: Mapping) -> GameSpec:
    states = tuple(data["states"])
    actions1 = tuple(data["actions1"])
    actions2 = tuple(data["actions2"])
    signals = tuple(data["signals"])

    payoff: dict[tuple[str, str, str], float] = {}
    for row in data["payoffs"]:
        value = float(row["value"])
        a1s = [row["a1"]] if "a1" in row else list(actions1)
        a2s = [row["a2"]] if "a2" in row else list(actions2)
        for i in a1s:
            for j in a2s:
                payoff[(row["state"], i, j)] = value

    scale = max((abs(v) for v in payoff.values()), default=1.0)
    if scale > 1.0:
        payoff = {key: v / scale for key, v in payoff.items()}
    else:
        scale = 1.0

    kernel: dict[tuple[str, str, str], tuple[Outcome, ...]] = {}
    for row in data["kernel"]:
        outs = tuple(Outcome(parse_prob(o["prob"]), o["next"], o["signal"])
                     for o in row["outcomes"])
        a1s = [row["a1"]] if "a1" in row else list(actions1)
        a2s = [row["a2"]] if "a2" in row else list(actions2)
        for i in a1s:
            for j in a2s:
                kernel[(row["state"], i, j)] = outs

    initial = {k: parse_prob(p) for k, p in data["initial"].items()}
    return GameSpec(
        states=states, actions1=actions1, actions2=actions2, signals=signals,
        payoff=payoff, kernel=kernel, initial=initial,
        absorbing=frozenset(data.get("absorbing", ())),
        name=data.get("name", ""), payoff_scale=scale,
    )


def load_game(path) -> GameSpec:
    with open(path) as fh:
        return game_from_dict(json.load(fh))


def save_game(spec: GameSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(game_to_dict(spec), fh, indent=2)
        fh.write("\n")
