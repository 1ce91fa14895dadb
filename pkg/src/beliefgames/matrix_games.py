"""Exact-value solver for finite zero-sum matrix games.

Solves the standard primal/dual linear programs after shifting all entries
positive, with a dense simplex using Bland's rule (deterministic, cycle-free).
The games that arise here are tiny (at most 3x3), so a dependency-free
tableau beats a general LP library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_TOL = 1e-12
GAP_TOL = 1e-9


@dataclass(frozen=True)
class MatrixGame:
    """Payoff matrix for the row player, who maximizes."""

    payoffs: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.payoffs, dtype=float)
        if M.ndim != 2 or M.size == 0:
            raise ValueError("payoff matrix must be 2-D and non-empty")
        if not np.all(np.isfinite(M)):
            raise ValueError("payoff matrix has non-finite entries")
        object.__setattr__(self, "payoffs", M)


@dataclass
class MatrixSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    duality_gap: float


def _simplex(A: np.ndarray):
    """Maximize 1'w subject to A w <= 1, w >= 0 (all entries of A positive).

    Returns (w, duals). Bland's rule pivots: entering variable is the lowest
    index with positive reduced cost, leaving variable the lowest-index basic
    variable among the minimum-ratio rows.
    """
    m, n = A.shape
    # tableau columns: [w variables | slacks | rhs]
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = 1.0  # reduced costs of the maximization objective
    basis = list(range(n, n + m))

    for _ in range(10000):
        enter = -1
        for j in range(n + m):
            if T[m, j] > _PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            break
        best_ratio, leave = None, -1
        for r in range(m):
            if T[r, enter] > _PIVOT_TOL:
                ratio = T[r, -1] / T[r, enter]
                if (best_ratio is None or ratio < best_ratio - _PIVOT_TOL
                        or (abs(ratio - best_ratio) <= _PIVOT_TOL
                            and basis[r] < basis[leave])):
                    best_ratio, leave = ratio, r
        if leave < 0:
            raise RuntimeError("unbounded matrix-game program")
        piv = T[leave, enter]
        T[leave] /= piv
        for r in range(m + 1):
            if r != leave and T[r, enter] != 0.0:
                T[r] -= T[r, enter] * T[leave]
        basis[leave] = enter
    else:
        raise RuntimeError("simplex failed to terminate")

    w = np.zeros(n)
    for r, b in enumerate(basis):
        if b < n:
            w[b] = T[r, -1]
    duals = -T[m, n:n + m]
    return w, duals


def solve(game: MatrixGame) -> MatrixSolution:
    """Value and optimal mixed strategies, with a certified duality gap."""
    M = game.payoffs
    m, n = M.shape

    if np.all(M == M.flat[0]):
        # degenerate game: every profile is optimal, return the uniform one
        x = np.full(m, 1.0 / m)
        y = np.full(n, 1.0 / n)
        return MatrixSolution(float(M.flat[0]), x, y, 0.0)

    shift = 1.0 - M.min()
    A = M + shift  # entries >= 1
    w, duals = _simplex(A)
    total = w.sum()
    value_shifted = 1.0 / total
    y = w * value_shifted
    x = duals * value_shifted
    x = np.maximum(x, 0.0)
    x /= x.sum()
    y = np.maximum(y, 0.0)
    y /= y.sum()
    value = value_shifted - shift

    row_guarantee = float((x @ M).min())
    col_guarantee = float((M @ y).max())
    return MatrixSolution(value, x, y, max(0.0, col_guarantee - row_guarantee))


def best_pure_response(game: MatrixGame, x: np.ndarray) -> tuple[int, float]:
    """Column minimizing x'M (lowest index on ties) and its value."""
    x = np.asarray(x, dtype=float)
    if x.shape != (game.payoffs.shape[0],):
        raise ValueError("strategy length does not match the matrix")
    t = x @ game.payoffs
    j = int(np.argmin(t))
    return j, float(t[j])


def value(M) -> float:
    return solve(MatrixGame(np.asarray(M, dtype=float))).value


# ---------------------------------------------------------------------------
# Independent brute-force oracle (used by the test suite): enumerate square
# support pairs, solve the equalizing system, keep verified saddle points.

def brute_force_value(M, tol: float = 1e-9) -> float:
    M = np.asarray(M, dtype=float)
    m, n = M.shape

    # pure saddle points first
    for i in range(m):
        for j in range(n):
            if M[i, j] <= M[i].min() + 1e-15 and M[i, j] >= M[:, j].max() - 1e-15:
                return float(M[i, j])

    from itertools import combinations

    for k in range(2, min(m, n) + 1):
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                sub = M[np.ix_(rows, cols)]
                # x'sub equalized over cols, sum x = 1; sub y equalized, sum y = 1
                Ax = np.zeros((k, k))
                Ax[:k - 1] = (sub[:, :k - 1] - sub[:, 1:k]).T
                Ax[k - 1] = 1.0
                bx = np.zeros(k)
                bx[k - 1] = 1.0
                Ay = np.zeros((k, k))
                Ay[:k - 1] = sub[:k - 1] - sub[1:k]
                Ay[k - 1] = 1.0
                try:
                    x = np.linalg.solve(Ax, bx)
                    y = np.linalg.solve(Ay, bx)
                except np.linalg.LinAlgError:
                    continue
                if x.min() < -tol or y.min() < -tol:
                    continue
                xf = np.zeros(m)
                xf[list(rows)] = np.maximum(x, 0.0)
                yf = np.zeros(n)
                yf[list(cols)] = np.maximum(y, 0.0)
                xf /= xf.sum()
                yf /= yf.sum()
                v = float(xf @ M @ yf)
                if (xf @ M).min() >= v - tol and (M @ yf).max() <= v + tol:
                    return v
    raise RuntimeError("no equilibrium found by support enumeration")
