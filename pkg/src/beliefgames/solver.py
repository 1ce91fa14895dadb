"""Discounted and finite-horizon values on a belief chain.

The one-stage operator per node is the value of the matrix game
lam*g(p,i,j) + (1-lam)*E[f(next)]. Discounted values iterate it from zero
(Jacobi sweeps, (1-lam)-contracting) until the sup-norm step is at most
tol*lam, which certifies a value error of tol; n-stage values apply the
same sweep with lam = 1/m for m = 1..n.

When every node is controlled by a single player (true for the catalog
games' chains), the operator reduces to that player's best action value and
runs in a compiled kernel; general nodes fall back to the LP solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import catalog, matrix_games
from ._kernels import vi_iterate
from .beliefs import BeliefChain

_CHUNK = 250_000
_FLOAT_FLOOR = 1e-13  # sup-norm steps below this are float-resolution noise


@dataclass
class ValueFunction:
    values: np.ndarray
    kind: str  # "discounted" | "horizon"
    lam: float | None = None
    horizon: int | None = None
    residual: float = 0.0
    error_bound: float = 0.0
    iterations: int = 0


@dataclass
class StationaryProfile:
    x: np.ndarray  # (nodes, |I|)
    y: np.ndarray  # (nodes, |J|)

    def validate(self) -> None:
        for arr in (self.x, self.y):
            if arr.min() < 0 or np.abs(arr.sum(axis=1) - 1.0).max() > 1e-12:
                raise ValueError("profile rows must be distributions")


class _Arrays:
    """Compressed controlled-action representation of a chain."""

    def __init__(self, chain: BeliefChain):
        n_i, n_j = chain.n_actions1, chain.n_actions2
        n = len(chain)
        self.controller = np.zeros(n, dtype=np.int8)
        for nd in range(n):
            indep_i, indep_j = chain.independence_flags(nd)
            self.controller[nd] = 1 if indep_j else (2 if indep_i else 0)
        self.all_controlled = bool(np.all(self.controller != 0))

        gpay, sense, node_ptr = [], [], [0]
        eprob, enxt, eptr = [], [], [0]
        for nd in range(n):
            ctrl = self.controller[nd]
            sense.append(1 if ctrl != 2 else -1)
            acts = range(n_i) if ctrl != 2 else range(n_j)
            for a in acts:
                i, j = (a, 0) if ctrl != 2 else (0, a)
                gpay.append(chain.payoff[nd, i, j])
                for prob, nxt, _sig in chain.transitions[(nd, i, j)]:
                    eprob.append(float(prob))
                    enxt.append(nxt)
                eptr.append(len(eprob))
            node_ptr.append(len(gpay))
        self.gpay = np.array(gpay)
        self.sense = np.array(sense, dtype=np.int8)
        self.node_ptr = np.array(node_ptr, dtype=np.int64)
        self.eptr = np.array(eptr, dtype=np.int64)
        self.eprob = np.array(eprob)
        self.enxt = np.array(enxt, dtype=np.int64)

        # float transition rows for matrix building / profile mixing
        self.rows: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}
        for (nd, i, j), row in chain.transitions.items():
            probs = np.array([float(p) for p, _, _ in row])
            nxts = np.array([v for _, v, _ in row], dtype=np.int64)
            self.rows[(nd, i, j)] = (probs, nxts)

    def kernel_args(self):
        return (self.gpay, self.sense, self.node_ptr, self.eptr, self.eprob,
                self.enxt)


def _arrays(chain: BeliefChain) -> _Arrays:
    if chain._arrays is None:
        chain._arrays = _Arrays(chain)
    return chain._arrays


def _continuation_matrix(chain: BeliefChain, arr: _Arrays, lam: float,
                         f: np.ndarray, nd: int) -> np.ndarray:
    n_i, n_j = chain.n_actions1, chain.n_actions2
    M = np.empty((n_i, n_j))
    for i in range(n_i):
        for j in range(n_j):
            probs, nxts = arr.rows[(nd, i, j)]
            M[i, j] = lam * chain.payoff[nd, i, j] + (1.0 - lam) * float(probs @ f[nxts])
    return M


def shapley_operator(chain: BeliefChain, lam: float, f: np.ndarray) -> np.ndarray:
    """One synchronized application of the one-stage operator."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    f = np.asarray(f, dtype=float)
    arr = _arrays(chain)
    if arr.all_controlled:
        out = f.copy()
        vi_iterate(*arr.kernel_args(), lam, -np.inf, 1, out)
        return out
    out = np.empty(len(chain))
    for nd in range(len(chain)):
        if arr.controller[nd] != 0:
            lo, hi = arr.node_ptr[nd], arr.node_ptr[nd + 1]
            vals = []
            for ai in range(lo, hi):
                s = 0.0
                for e in range(arr.eptr[ai], arr.eptr[ai + 1]):
                    s += arr.eprob[e] * f[arr.enxt[e]]
                vals.append(lam * arr.gpay[ai] + (1.0 - lam) * s)
            out[nd] = max(vals) if arr.sense[nd] > 0 else min(vals)
        else:
            M = _continuation_matrix(chain, arr, lam, f, nd)
            out[nd] = matrix_games.solve(matrix_games.MatrixGame(M)).value
    return out


def _iterate_to_tol(chain: BeliefChain, lam: float, tol: float):
    """Sweep from zero until step <= tol*lam; returns (f, residual, sweeps)."""
    arr = _arrays(chain)
    stop = tol * lam
    f = np.zeros(len(chain))
    total = 0
    expected = 2 if lam >= 1.0 else int(math.log(tol) / math.log1p(-lam)) + 2
    cap = 4 * expected + 1_000_000
    prev_step = np.inf
    while True:
        if arr.all_controlled:
            step, sweeps = vi_iterate(*arr.kernel_args(), lam, stop,
                                      min(_CHUNK, cap - total), f)
        else:
            step, sweeps = np.inf, 0
            while sweeps < min(10_000, cap - total) and step > stop:
                nf = shapley_operator(chain, lam, f)
                step = float(np.abs(nf - f).max())
                f = nf
                sweeps += 1
        total += sweeps
        if step <= stop:
            return f, step, total
        if step <= _FLOAT_FLOOR and step >= prev_step * 0.99:
            # stuck at float resolution; report the achieved residual honestly
            return f, step, total
        if total >= cap:
            raise RuntimeError(
                f"value iteration did not reach step {stop:g} in {total} sweeps")
        prev_step = step


def _extract_profile(chain: BeliefChain, lam: float, f: np.ndarray) -> StationaryProfile:
    arr = _arrays(chain)
    n = len(chain)
    n_i, n_j = chain.n_actions1, chain.n_actions2
    x = np.zeros((n, n_i))
    y = np.zeros((n, n_j))
    for nd in range(n):
        ctrl = arr.controller[nd]
        if ctrl == 0:
            M = _continuation_matrix(chain, arr, lam, f, nd)
            sol = matrix_games.solve(matrix_games.MatrixGame(M))
            x[nd] = sol.row_strategy
            y[nd] = sol.col_strategy
            continue
        lo, hi = arr.node_ptr[nd], arr.node_ptr[nd + 1]
        vals = np.empty(hi - lo)
        for k, ai in enumerate(range(lo, hi)):
            s = 0.0
            for e in range(arr.eptr[ai], arr.eptr[ai + 1]):
                s += arr.eprob[e] * f[arr.enxt[e]]
            vals[k] = lam * arr.gpay[ai] + (1.0 - lam) * s
        if ctrl == 1:
            x[nd, int(np.argmax(vals))] = 1.0
            y[nd, 0] = 1.0
        else:
            x[nd, 0] = 1.0
            y[nd, int(np.argmin(vals))] = 1.0
    return StationaryProfile(x, y)


def discounted_value(chain: BeliefChain, lam: float, tol: float = 1e-10,
                     want_profile: bool = True):
    """Fixed point of the one-stage operator, with a certified error bound.

    Returns (ValueFunction, StationaryProfile or None). The reported
    error_bound is residual*(1-lam)/lam plus the chain's truncation bound.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    f, residual, sweeps = _iterate_to_tol(chain, lam, tol)
    bound = residual * (1.0 - lam) / lam + chain.truncation_bound
    vf = ValueFunction(values=f, kind="discounted", lam=lam,
                       residual=residual, error_bound=bound, iterations=sweeps)
    profile = _extract_profile(chain, lam, f) if want_profile else None
    return vf, profile


def finite_horizon(chain: BeliefChain, n: int, keep_all: bool = True) -> list[ValueFunction]:
    """n-stage values v_1..v_n by backward induction (Cesaro weights).

    v_m applies the one-stage operator at lam = 1/m to v_{m-1}, so only two
    layers are alive; pass keep_all=False to get just v_n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    arr = _arrays(chain)
    f = np.zeros(len(chain))
    out: list[ValueFunction] = []
    for m in range(1, n + 1):
        lam = 1.0 / m
        if arr.all_controlled:
            vi_iterate(*arr.kernel_args(), lam, -np.inf, 1, f)
        else:
            f = shapley_operator(chain, lam, f)
        if keep_all or m == n:
            out.append(ValueFunction(values=f.copy(), kind="horizon", horizon=m,
                                     error_bound=chain.truncation_bound))
    return out


def evaluate_profile(chain: BeliefChain, profile: StationaryProfile, lam: float,
                     tol: float = 1e-10) -> np.ndarray:
    """Discounted payoff of a stationary profile (linear fixed point)."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    profile.validate()
    arr = _arrays(chain)
    n = len(chain)
    n_i, n_j = chain.n_actions1, chain.n_actions2
    gp, eprob, enxt, eptr = [], [], [], [0]
    for nd in range(n):
        g = 0.0
        acc: dict[int, float] = {}
        for i in range(n_i):
            xi = profile.x[nd, i]
            if xi == 0.0:
                continue
            for j in range(n_j):
                w = xi * profile.y[nd, j]
                if w == 0.0:
                    continue
                g += w * chain.payoff[nd, i, j]
                probs, nxts = arr.rows[(nd, i, j)]
                for p, v in zip(probs, nxts):
                    acc[int(v)] = acc.get(int(v), 0.0) + w * p
        gp.append(g)
        for v in sorted(acc):
            eprob.append(acc[v])
            enxt.append(v)
        eptr.append(len(eprob))
    gp = np.array(gp)
    sense = np.ones(n, dtype=np.int8)
    node_ptr = np.arange(n + 1, dtype=np.int64)
    eptr = np.array(eptr, dtype=np.int64)
    eprob = np.array(eprob)
    enxt = np.array(enxt, dtype=np.int64)

    stop = tol * lam
    f = np.zeros(n)
    expected = 2 if lam >= 1.0 else int(math.log(tol) / math.log1p(-lam)) + 2
    cap = 4 * expected + 1_000_000
    total = 0
    prev_step = np.inf
    while True:
        step, sweeps = vi_iterate(gp, sense, node_ptr, eptr, eprob, enxt, lam,
                                  stop, min(_CHUNK, cap - total), f)
        total += sweeps
        if step <= stop or (step <= _FLOAT_FLOOR and step >= prev_step * 0.99):
            return f
        if total >= cap:
            raise RuntimeError("profile evaluation failed to converge")
        prev_step = step


def threshold_profile(chain: BeliefChain, a: int | None, b: int | None) -> StationaryProfile:
    """Quit-at-index profile on a gamma-family chain.

    Player 1 quits at payoff-0 chain indices n >= a, player 2 at payoff-1
    indices n >= b; None means never quit. Both play C elsewhere.
    """
    spec = chain.spec
    i_c, i_q = spec.a1_index["C"], spec.a1_index["Q"]
    j_c, j_q = spec.a2_index["C"], spec.a2_index["Q"]
    n = len(chain)
    x = np.zeros((n, chain.n_actions1))
    y = np.zeros((n, chain.n_actions2))
    for nd in range(n):
        tag = catalog.classify_chain_belief(spec, chain.nodes[nd])
        xi, yj = i_c, j_c
        if tag is not None and tag[0] == "zero" and a is not None and tag[1] >= a:
            xi = i_q
        if tag is not None and tag[0] == "one" and b is not None and tag[1] >= b:
            yj = j_q
        x[nd, xi] = 1.0
        y[nd, yj] = 1.0
    return StationaryProfile(x, y)


def neyman_gap(chain: BeliefChain, n0: int, n: int, tol: float = 1e-10):
    """Compare the n-stage value with the 1/n-discounted value.

    Returns (lhs, rhs): lhs is the sup-norm over chain nodes of v_n - v_{1/n};
    rhs is (n0/n)*||v_{n0} - v_{1/n0}|| plus the telescoping sum of
    ||v_{1/m} - v_{1/(m+1)}|| for m = n0..n-1. The inequality lhs <= rhs
    holds for the dynamic programming recursions on any chain.
    """
    if not 1 <= n0 <= n:
        raise ValueError("need 1 <= n0 <= n")
    horizons = finite_horizon(chain, n, keep_all=True)
    v_n0 = horizons[n0 - 1].values
    v_n = horizons[n - 1].values

    w_prev = discounted_value(chain, 1.0 / n0, tol, want_profile=False)[0].values
    rhs = (n0 / n) * float(np.abs(v_n0 - w_prev).max())
    for m in range(n0, n):
        w_next = discounted_value(chain, 1.0 / (m + 1), tol, want_profile=False)[0].values
        rhs += float(np.abs(w_prev - w_next).max())
        w_prev = w_next
    lhs = float(np.abs(v_n - w_prev).max())
    return lhs, rhs
