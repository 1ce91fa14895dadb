"""Built-in game instances.

All probabilities are exact rationals. Payoffs are 0/1 and independent of
actions; absorbing states pay their value forever. In `gamma` and
`gamma_r`, each non-absorbing state is controlled by exactly one player:
player 2 steers the payoff-1 side, player 1 the payoff-0 side, and the
quit action Q trades a dyadic absorption risk for switching sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .beliefs import Belief
from .model import GameSpec, Outcome, ONE, validate

F = Fraction

HALF = F(1, 2)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: GameSpec
    parameters: dict = field(default_factory=dict)
    notes: str = ""


def _rows_controlled(spec_rows, actions1, actions2, controller):
    """Expand per-controller-action rows to full (state, a1, a2) kernel rows."""
    kernel = {}
    for state, per_action in spec_rows.items():
        for i in actions1:
            for j in actions2:
                act = i if controller == 1 else j
                kernel[(state, i, j)] = tuple(Outcome(*o) for o in per_action[act])
    return kernel


def _absorbing_rows(state, signal, actions1, actions2):
    row = (Outcome(ONE, state, signal),)
    return {(state, i, j): row for i in actions1 for j in actions2}


def _payoffs(one_states, states, actions1, actions2):
    return {(k, i, j): (1.0 if k in one_states else 0.0)
            for k in states for i in actions1 for j in actions2}


def gamma() -> GameSpec:
    """Seven-state game with quit risks 2^-n for player 1 and 2^-2n for player 2."""
    acts = ("C", "Q")
    states = ("1*", "1++", "1T", "1+", "0*", "0++", "0+")
    kernel = {}
    kernel.update(_rows_controlled({
        "1++": {"C": [(HALF, "1T", "D"), (HALF, "1++", "D'")],
                "Q": [(ONE, "1*", "D'")]},
        "1T": {"C": [(F(1, 8), "1++", "D"), (F(3, 8), "1+", "D"),
                     (HALF, "1++", "D'")],
               "Q": [(ONE, "1*", "D'")]},
        "1+": {"C": [(HALF, "1+", "D"), (HALF, "1++", "D'")],
               "Q": [(ONE, "0++", "D")]},
    }, acts, acts, controller=2))
    kernel.update(_rows_controlled({
        "0++": {"C": [(F(1, 4), "0++", "D"), (F(1, 4), "0+", "D"),
                      (HALF, "0++", "D'")],
                "Q": [(ONE, "0*", "D'")]},
        "0+": {"C": [(HALF, "0+", "D"), (HALF, "0++", "D'")],
               "Q": [(ONE, "1++", "D")]},
    }, acts, acts, controller=1))
    kernel.update(_absorbing_rows("1*", "D", acts, acts))
    kernel.update(_absorbing_rows("0*", "D", acts, acts))
    return GameSpec(
        states=states, actions1=acts, actions2=acts, signals=("D", "D'"),
        payoff=_payoffs({"1*", "1++", "1T", "1+"}, states, acts, acts),
        kernel=kernel, initial={"1++": ONE}, absorbing=frozenset({"1*", "0*"}),
        name="gamma",
    )


def gamma_r(r: int) -> GameSpec:
    """Stretched variant: player 1 quits on the grid r*N, player 2 on 2r*N.

    r=1 reproduces `gamma` up to renaming 1T -> 1T1.
    """
    if not isinstance(r, int) or r < 1:
        raise ValueError("r must be an integer >= 1")
    acts = ("C", "Q")

    def tname(side: str, l: int) -> str:
        return f"{side}++" if l == 0 else f"{side}T{l}"

    one_chain = [tname("1", l) for l in range(2 * r)]
    zero_chain = [tname("0", l) for l in range(r)]
    states = tuple(one_chain + ["1+", "1*"] + zero_chain + ["0+", "0*"])

    def side_rows(side: str, length: int):
        # chain states side^{T_0}..side^{T_{length-1}}; the last recycles with a
        # 2^-(length+1) absorbing-risk refresh edge back to the chain head.
        rows = {}
        star, plus, head = f"{side}*", f"{side}+", tname(side, 0)
        for l in range(length - 1):
            rows[tname(side, l)] = {
                "C": [(HALF, tname(side, l + 1), "D"), (HALF, head, "D'")],
                "Q": [(ONE, star, "D'")],
            }
        rows[tname(side, length - 1)] = {
            "C": [(F(1, 2 ** (length + 1)), head, "D"),
                  (HALF * (1 - F(1, 2 ** length)), plus, "D"),
                  (HALF, head, "D'")],
            "Q": [(ONE, star, "D'")],
        }
        return rows

    one_rows = side_rows("1", 2 * r)
    one_rows["1+"] = {"C": [(HALF, "1+", "D"), (HALF, "1++", "D'")],
                      "Q": [(ONE, "0++", "D")]}
    zero_rows = side_rows("0", r)
    zero_rows["0+"] = {"C": [(HALF, "0+", "D"), (HALF, "0++", "D'")],
                       "Q": [(ONE, "1++", "D")]}

    kernel = {}
    kernel.update(_rows_controlled(one_rows, acts, acts, controller=2))
    kernel.update(_rows_controlled(zero_rows, acts, acts, controller=1))
    kernel.update(_absorbing_rows("1*", "D", acts, acts))
    kernel.update(_absorbing_rows("0*", "D", acts, acts))

    one_states = set(one_chain) | {"1+", "1*"}
    return GameSpec(
        states=states, actions1=acts, actions2=acts, signals=("D", "D'"),
        payoff=_payoffs(one_states, states, acts, acts),
        kernel=kernel, initial={"1++": ONE}, absorbing=frozenset({"1*", "0*"}),
        name=f"gamma_r({r})",
    )


def state_blind() -> GameSpec:
    """State-blind variant: no state signal; matched/mismatched action pairs
    reproduce the public random walk of `gamma`."""
    a1 = ("T", "B", "Q")
    a2 = ("L", "R", "Q")
    states = ("1*", "1++", "1T", "1+", "0*", "0++", "0+")
    sig = "-"

    def det(nxt):
        return [(ONE, nxt, sig)]

    mix_1T = [(F(3, 4), "1+", sig), (F(1, 4), "1++", sig)]
    mix_0 = [(HALF, "0++", sig), (HALF, "0+", sig)]
    tables = {
        "1++": {("T", "L"): det("1++"), ("T", "R"): det("1T"), ("T", "Q"): det("1*"),
                ("B", "L"): det("1T"), ("B", "R"): det("1++"), ("B", "Q"): det("1*"),
                ("Q", "L"): det("0*"), ("Q", "R"): det("0*"), ("Q", "Q"): det("0*")},
        "1T": {("T", "L"): det("1++"), ("T", "R"): mix_1T, ("T", "Q"): det("1*"),
               ("B", "L"): mix_1T, ("B", "R"): det("1++"), ("B", "Q"): det("1*"),
               ("Q", "L"): det("0*"), ("Q", "R"): det("0*"), ("Q", "Q"): det("0*")},
        "1+": {("T", "L"): det("1++"), ("T", "R"): det("1+"), ("T", "Q"): det("0++"),
               ("B", "L"): det("1+"), ("B", "R"): det("1++"), ("B", "Q"): det("0++"),
               ("Q", "L"): det("0*"), ("Q", "R"): det("0*"), ("Q", "Q"): det("0*")},
        "0++": {("T", "L"): mix_0, ("T", "R"): det("0++"), ("T", "Q"): det("1*"),
                ("B", "L"): det("0++"), ("B", "R"): mix_0, ("B", "Q"): det("1*"),
                ("Q", "L"): det("0*"), ("Q", "R"): det("0*"), ("Q", "Q"): det("1*")},
        "0+": {("T", "L"): det("0+"), ("T", "R"): det("0++"), ("T", "Q"): det("1*"),
               ("B", "L"): det("0++"), ("B", "R"): det("0+"), ("B", "Q"): det("1*"),
               ("Q", "L"): det("1++"), ("Q", "R"): det("1++"), ("Q", "Q"): det("1*")},
    }
    kernel = {}
    for state, table in tables.items():
        for (i, j), row in table.items():
            kernel[(state, i, j)] = tuple(Outcome(*o) for o in row)
    kernel.update(_absorbing_rows("1*", sig, a1, a2))
    kernel.update(_absorbing_rows("0*", sig, a1, a2))
    return GameSpec(
        states=states, actions1=a1, actions2=a2, signals=(sig,),
        payoff=_payoffs({"1*", "1++", "1T", "1+"}, states, a1, a2),
        kernel=kernel, initial={"1++": ONE}, absorbing=frozenset({"1*", "0*"}),
        name="state_blind",
    )


def one_informed() -> GameSpec:
    """Five-state variant where player 2 observes the state (player 1 does not).

    The asymmetry lives outside this symmetric description; the simulator's
    informed strategies read the true state, the uninformed side tracks the
    public belief.
    """
    a1 = ("T", "B", "Q")
    a2 = ("L", "R")
    states = ("1*", "1", "0*", "0++", "0+")
    sig = "-"

    def det(nxt):
        return [(ONE, nxt, sig)]

    mix_0 = [(HALF, "0++", sig), (HALF, "0+", sig)]
    tables = {
        "1": {("T", "L"): det("1"), ("T", "R"): det("0++"),
              ("B", "L"): det("0++"), ("B", "R"): det("1*"),
              ("Q", "L"): det("0*"), ("Q", "R"): det("0*")},
        "0++": {("T", "L"): mix_0, ("T", "R"): det("0++"),
                ("B", "L"): det("0++"), ("B", "R"): mix_0,
                ("Q", "L"): det("0*"), ("Q", "R"): det("0*")},
        "0+": {("T", "L"): det("0+"), ("T", "R"): det("0++"),
               ("B", "L"): det("0++"), ("B", "R"): det("0+"),
               ("Q", "L"): det("1"), ("Q", "R"): det("1")},
    }
    kernel = {}
    for state, table in tables.items():
        for (i, j), row in table.items():
            kernel[(state, i, j)] = tuple(Outcome(*o) for o in row)
    kernel.update(_absorbing_rows("1*", sig, a1, a2))
    kernel.update(_absorbing_rows("0*", sig, a1, a2))
    return GameSpec(
        states=states, actions1=a1, actions2=a2, signals=(sig,),
        payoff=_payoffs({"1*", "1"}, states, a1, a2),
        kernel=kernel, initial={"1": ONE}, absorbing=frozenset({"1*", "0*"}),
        name="one_informed",
    )


_BUILDERS = {
    "gamma": (gamma, (), "seven-state quit game, asymmetric dyadic risks"),
    "gamma_r": (gamma_r, ("r",), "stretched quit game on grids r*N vs 2r*N"),
    "state_blind": (state_blind, (), "no state signal; actions drive the public belief"),
    "one_informed": (one_informed, (), "player 2 sees the state; simulation only"),
}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str, **params) -> CatalogEntry:
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}")
    builder, wanted, notes = _BUILDERS[name]
    unknown = set(params) - set(wanted)
    if unknown:
        raise ValueError(f"unexpected parameters {sorted(unknown)} for {name!r}")
    missing = [w for w in wanted if w not in params]
    if missing:
        raise ValueError(f"{name!r} needs parameters {missing}")
    args = [params[w] for w in wanted]
    spec = builder(*args)
    entry = CatalogEntry(name=name, spec=spec,
                         parameters={w: params[w] for w in wanted if w in params},
                         notes=notes)
    problems = validate(spec)
    if problems:
        raise AssertionError(f"catalog entry {name!r} is invalid: {problems}")
    return entry


# ---------------------------------------------------------------------------
# The dyadic belief chain of gamma / gamma_r and its index bookkeeping.

def _chain_r(spec: GameSpec) -> int:
    # 3r + 4 states for gamma_r; gamma itself is the r=1 layout
    return (len(spec.states) - 4) // 3


def _light_state(spec: GameSpec, side: str, l: int) -> str:
    if l == 0:
        return f"{side}++"
    if side == "1" and "1T" in spec.state_index:
        return "1T"
    return f"{side}T{l}"


def one_chain_belief(spec: GameSpec, n: int) -> Belief:
    """Belief 2^-2mr on the n-th payoff-1 chain state, rest on 1+ (n = 2mr + l)."""
    r = _chain_r(spec)
    m, l = divmod(n, 2 * r)
    w = F(1, 2 ** (2 * m * r))
    return Belief({_light_state(spec, "1", l): w, "1+": 1 - w})


def zero_chain_belief(spec: GameSpec, n: int) -> Belief:
    """Belief 2^-mr on the n-th payoff-0 chain state, rest on 0+ (n = mr + l)."""
    r = _chain_r(spec)
    m, l = divmod(n, r)
    w = F(1, 2 ** (m * r))
    return Belief({_light_state(spec, "0", l): w, "0+": 1 - w})


def classify_chain_belief(spec: GameSpec, p: Belief):
    """Map a belief of the gamma family to ('one'|'zero', n), ('abs', state), or None."""
    support = p.support()
    if support == {"1*"} or support == {"0*"}:
        return ("abs", next(iter(support)))
    r = _chain_r(spec)
    for side, period, heavy in (("1", 2 * r, "1+"), ("0", r, "0+")):
        lights = [_light_state(spec, side, l) for l in range(period)]
        light = support - {heavy}
        if len(light) != 1 or not support <= set(lights) | {heavy}:
            continue
        s = next(iter(light))
        if s not in lights:
            continue
        l = lights.index(s)
        w = p.weight(s)
        if w.numerator != 1:
            continue
        den = w.denominator
        k = den.bit_length() - 1
        if (1 << k) != den or k % period != 0:
            continue
        return (side_tag(side), k + l)
    return None


def side_tag(side: str) -> str:
    return "one" if side == "1" else "zero"


def node_label(spec: GameSpec, p: Belief) -> str:
    """Short label for chain beliefs ("1_4", "0*", ...), generic otherwise."""
    tag = classify_chain_belief(spec, p)
    if tag is None:
        return p.label()
    if tag[0] == "abs":
        return tag[1]
    return ("1_" if tag[0] == "one" else "0_") + str(tag[1])
