"""Closed forms for the quit games and their discount sweeps.

The discounted game starting on the payoff-1 side is strategically a
one-shot game where each player picks a quit index on their grid (all of N
for player 1, the even integers for player 2 in the base game; r*N and 2r*N
in the stretched one). f_lambda(n) is the discounted weight a player
salvages by quitting at index n, g_lambda(a, b) the resulting payoff, and
both players simply maximize f_lambda on their grid. The value along the
discount sequences 2^-(4mr+1) and 2^-(4mr+2r+1) approaches two different
limits, which is the oscillation the sweep report exposes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from io import StringIO

from . import beliefs, catalog, solver


class ThresholdScanError(ValueError):
    """The scan grid did not bracket the peak of f_lambda."""


def f_lambda(n: int, lam: float) -> float:
    """Quit-weight (1-2^-n)(1-lam^2) / (1 + 2^(n+1) lam (1-lam)^-n - lam).

    The middle term is evaluated in log space; it overflows to inf for large
    n, in which case the value correctly degrades to 0.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if n < 0:
        raise ValueError("n must be >= 0")
    t = _pow_term(n, lam)
    return (1.0 - 2.0 ** -n) * (1.0 - lam * lam) / (1.0 + t - lam)


def _pow_term(n: int, lam: float) -> float:
    # 2^(n+1) * lam * (1-lam)^-n in log space; inf past the float range
    log_t = (n + 1) * math.log(2.0) + math.log(lam) - n * math.log1p(-lam)
    return math.exp(log_t) if log_t < 709.0 else math.inf


def g_lambda(a: int, b: int, lam: float) -> float:
    """Discounted payoff of the quit-index pair (a, b), player 1 maximizing."""
    fa, fb = f_lambda(a, lam), f_lambda(b, lam)
    return (1.0 - fb) / (1.0 - fa * fb)


def geometric_transform(n: int, lam: float) -> float:
    """E((1-lam)^T) for T = fair-coin flips until n consecutive heads (T=0 at n=0)."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    return (1.0 + lam) / (1.0 + _pow_term(n, lam) - lam)


def f_hat(r_var: float, lam: float) -> float:
    """Continuous reparametrization of f_lambda: f_lambda(n) = (1-lam^2) f_hat(2^-n)."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if r_var == 0.0:
        return 0.0
    s = 1.0 - math.log1p(-lam) / math.log(2.0)
    return (1.0 - r_var) / (1.0 + 2.0 * lam * r_var ** -s - lam)


def _h(r_var: float, lam: float) -> float:
    # numerator of f_hat'; strictly decreasing on (0, 1)
    s = 1.0 - math.log1p(-lam) / math.log(2.0)
    return lam - 1.0 + 2.0 * lam * (-(1.0 + s) * r_var + s) * r_var ** (-s - 1.0)


def r_star(lam: float) -> float:
    """Unique maximizer of f_hat on (0, 1), by bisection on its derivative."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    lo, hi = 1e-300, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _h(mid, lam) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Threshold optimization

@dataclass(frozen=True)
class ThresholdGame:
    """Strategic form of the discounted quit game: index grids stride1*N, stride2*N."""

    lam: float
    stride1: int = 1
    stride2: int = 2

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lam must lie in (0, 1]")
        if self.stride1 < 1 or self.stride2 < 1:
            raise ValueError("strides must be >= 1")


@dataclass(frozen=True)
class ThresholdPick:
    a_star: int
    b_star: int
    a_ties: tuple[int, ...]
    b_ties: tuple[int, ...]


def _argmax_on_grid(lam: float, stride: int, n_max: int):
    best, ties = -1.0, []
    grid = list(range(0, n_max + 1, stride))
    for n in grid:
        v = f_lambda(n, lam)
        if v > best:
            best, ties = v, [n]
        elif v == best:
            ties.append(n)
    tail = f_lambda(grid[-1], lam)
    if grid[-1] <= max(ties) or tail >= best:
        raise ThresholdScanError(
            f"peak of f_lambda not bracketed by n_max={n_max} (stride {stride})")
    return ties[0], tuple(ties)


def default_n_max(lam: float, stride1: int = 1, stride2: int = 2) -> int:
    peak = max(0.0, 0.5 * math.log2(1.0 / (2.0 * lam)))
    return int(3 * peak) + 8 * max(stride1, stride2) + 8


def optimal_thresholds(game: ThresholdGame, n_max: int | None = None) -> ThresholdPick:
    """Exhaustive scan of f_lambda on both grids; returns argmaxes with ties.

    Unimodality of f_lambda makes a bracketed peak global; the scan errors
    out if the grid does not extend past the peak.
    """
    if n_max is None:
        n_max = default_n_max(game.lam, game.stride1, game.stride2)
    a, a_ties = _argmax_on_grid(game.lam, game.stride1, n_max)
    b, b_ties = _argmax_on_grid(game.lam, game.stride2, n_max)
    return ThresholdPick(a, b, a_ties, b_ties)


def threshold_value(game: ThresholdGame, n_max: int | None = None) -> float:
    """Value of the quit game: g_lambda at the dominant indices.

    Exact ties for player 2's argmax are resolved by the minimum of
    g_lambda over the tied candidates (they agree unless floats tie by
    accident, in which case min is the conservative pick).
    """
    pick = optimal_thresholds(game, n_max)
    return min(g_lambda(pick.a_star, b, game.lam) for b in pick.b_ties)


# ---------------------------------------------------------------------------
# Compact-action game

@dataclass(frozen=True)
class CompactGame:
    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lam must lie in (0, 1]")


def compact_payoff(x: float, y: float, lam: float) -> float:
    """Discounted payoff from the payoff-1 state under exit intensities (x, y)."""
    if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
        raise ValueError("x and y must lie in [0, 1]")
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must lie in (0, 1]")
    oml = 1.0 - lam
    num = (1.0 - oml * (1.0 - y * y)) * (1.0 - oml * (1.0 - x))
    den = (1.0 - oml * (1.0 - x * y)) * (1.0 - oml * (1.0 - x) * (1.0 - y))
    return num / den


def _golden_max(fn, lo: float, hi: float, iters: int = 120) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    mid = 0.5 * (a + b)
    return mid, fn(mid)


@dataclass(frozen=True)
class CompactSolution:
    value: float
    x_star: float
    y_choice: float


def compact_value(lam: float) -> CompactSolution:
    """Value with player 2 restricted to exit intensities {0} u {4^-m}.

    The inner max over x in [0,1] is unimodal (payoff concave in x) and is
    taken by golden section; the outer min needs only the two grid points
    bracketing the unrestricted minimizer y* plus y = 0, by convexity in y.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    x_star = (math.sqrt(lam) - lam) / (1.0 - lam)
    y_star = x_star
    m = int(math.floor(math.log(1.0 / y_star) / math.log(4.0)))
    while 4.0 ** -m < y_star:
        m -= 1
    while m + 1 >= 0 and 4.0 ** -(m + 1) >= y_star:
        m += 1
    candidates = {0.0, min(1.0, 4.0 ** -m), 4.0 ** -(m + 1)}
    best_val, best_y = math.inf, 0.0
    for y in sorted(candidates):
        _, val = _golden_max(lambda x: compact_payoff(x, y, lam), 0.0, 1.0)
        if val < best_val:
            best_val, best_y = val, y
    return CompactSolution(best_val, x_star, best_y)


# ---------------------------------------------------------------------------
# Discount sequences, sweeps, derivative diagnostic

def lambda_sequence(m: int, r: int = 1) -> float:
    return 2.0 ** -(4 * m * r + 1)


def mu_sequence(m: int, r: int = 1) -> float:
    return 2.0 ** -(4 * m * r + 2 * r + 1)


@dataclass
class SweepRow:
    lam: float
    value: float
    a_star: int
    b_star: int
    method: str
    error_bound: float
    discrepancy: float | None = None


@dataclass
class SweepReport:
    game: str
    r: int
    rows: list[SweepRow] = field(default_factory=list)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "value", "a_star", "b_star", "method",
                         "error_bound"])
        for row in self.rows:
            writer.writerow([repr(row.lam), repr(row.value), row.a_star,
                             row.b_star, row.method, repr(row.error_bound)])

    def to_csv(self) -> str:
        buf = StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def profile_thresholds(chain, profile) -> tuple[int | None, int | None]:
    """Smallest quit indices of a stationary profile on a gamma-family chain."""
    spec = chain.spec
    i_q = spec.a1_index.get("Q")
    j_q = spec.a2_index.get("Q")
    a = b = None
    for nd in range(len(chain)):
        tag = catalog.classify_chain_belief(spec, chain.nodes[nd])
        if tag is None or tag[0] == "abs":
            continue
        side, n = tag
        if side == "zero" and i_q is not None and profile.x[nd, i_q] > 0.5:
            a = n if a is None else min(a, n)
        if side == "one" and j_q is not None and profile.y[nd, j_q] > 0.5:
            b = n if b is None else min(b, n)
    return a, b


def sweep(game: str = "gamma", r: int = 1, lams=None, sequence: str | None = None,
          m_from: int | None = None, m_to: int | None = None,
          method: str = "closed-form", n_max: int | None = None,
          max_nodes: int = 4096, tol: float = 1e-10) -> SweepReport:
    """Per-discount value rows, by closed form, value iteration, or both.

    With method="both" each discount gets one row per method and the rows
    carry |closed - iterated| in the discrepancy field (not part of the CSV
    schema).
    """
    if method not in ("closed-form", "value-iteration", "both"):
        raise ValueError(f"unknown method {method!r}")
    if game not in ("gamma", "gamma_r"):
        raise ValueError("sweep supports the gamma family only")
    if game == "gamma" and r != 1:
        raise ValueError("the base game has r = 1; use game='gamma_r' for r > 1")
    if r < 1:
        raise ValueError("r must be >= 1")
    if sequence is not None:
        if m_from is None or m_to is None:
            raise ValueError("sequence sweeps need m_from and m_to")
        gen = lambda_sequence if sequence == "lambda_m" else mu_sequence
        if sequence not in ("lambda_m", "mu_m"):
            raise ValueError(f"unknown sequence {sequence!r}")
        lams = [gen(m, r) for m in range(m_from, m_to + 1)]
    if not lams:
        raise ValueError("no discounts to sweep")
    lams = sorted(set(lams), reverse=True)

    report = SweepReport(game=game, r=r)
    chain = None
    if method in ("value-iteration", "both"):
        spec = catalog.gamma() if r == 1 else catalog.gamma_r(r)
        chain = beliefs.reduce(spec, beliefs.initial_belief(spec), max_nodes)

    for lam in lams:
        closed = None
        if method in ("closed-form", "both"):
            tg = ThresholdGame(lam, r, 2 * r)
            pick = optimal_thresholds(tg, n_max)
            closed = threshold_value(tg, n_max)
            report.rows.append(SweepRow(lam, closed, pick.a_star, pick.b_star,
                                        "closed-form", 0.0))
        if method in ("value-iteration", "both"):
            vf, profile = solver.discounted_value(chain, lam, tol)
            a, b = profile_thresholds(chain, profile)
            row = SweepRow(lam, float(vf.values[chain.root]),
                           -1 if a is None else a, -1 if b is None else b,
                           "value-iteration", vf.error_bound)
            if closed is not None:
                row.discrepancy = abs(closed - row.value)
                report.rows[-1].discrepancy = row.discrepancy
            report.rows.append(row)
    return report


@dataclass
class DerivativeSample:
    param: float
    value: float
    a_star: int
    b_star: int
    normalized: float | None  # |dv/dparam| * scale, None at the grid ends
    breakpoint: bool
    within: bool


@dataclass
class DerivativeReport:
    r: int
    m: int
    regime_ok: bool
    regime_note: str
    mu_bound: float
    mu_samples: list[DerivativeSample]
    mu_breakpoints: int
    lam_bound: float
    lam_samples: list[DerivativeSample]

    def mu_compliance(self) -> float:
        checked = [s for s in self.mu_samples
                   if s.normalized is not None and not s.breakpoint]
        if not checked:
            return 1.0
        return sum(s.within for s in checked) / len(checked)


def _scan_interval(lo: float, hi: float, grid: int, r: int, n_max=None):
    step = (hi - lo) / (grid - 1)
    out = []
    for k in range(grid):
        p = lo + k * step
        tg = ThresholdGame(p, r, 2 * r)
        pick = optimal_thresholds(tg, n_max)
        out.append((p, threshold_value(tg, n_max), pick.a_star, pick.b_star))
    return out


def confirm_regime_m(r: int, m_max: int = 8, grid: int = 9) -> int:
    """Smallest m whose mu-interval shows the quit-index pattern the
    derivative bound needs: a* = (2m+1)r throughout, b* in {2mr, 2mr+2r}
    with at most one switch."""
    for m in range(1, m_max + 1):
        mu = mu_sequence(m, r)
        hi = 2.0 ** (r / 2.0 - 1.0) * mu
        rows = _scan_interval(mu, hi, grid, r)
        a_ok = all(a == (2 * m + 1) * r for _, _, a, _ in rows)
        bs = [b for _, _, _, b in rows]
        b_ok = all(b in (2 * m * r, 2 * m * r + 2 * r) for b in bs)
        switches = sum(b1 != b0 for b0, b1 in zip(bs, bs[1:]))
        if a_ok and b_ok and switches <= 1:
            return m
    raise ThresholdScanError(f"no m <= {m_max} shows the expected quit-index pattern")


def derivative_check(r: int, m: int | None = None, grid: int = 33,
                     slack: float = 1.10) -> DerivativeReport:
    """Finite-difference check of the value's sensitivity to the discount.

    On [mu_m, 2^(r/2-1) mu_m] the normalized slope |dv/dmu|*mu must stay
    within slack of 2^(-r/2) except at the single index-switch breakpoint;
    on [lam_m, 2^(r-1) lam_m] the bound is 2^(r/2+2) against |dv/dlam|*sqrt(lam).
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    if m is None:
        m = confirm_regime_m(r)

    mu = mu_sequence(m, r)
    rows = _scan_interval(mu, 2.0 ** (r / 2.0 - 1.0) * mu, grid, r)
    a_ok = all(a == (2 * m + 1) * r for _, _, a, _ in rows)
    bs = [b for _, _, _, b in rows]
    b_ok = all(b in (2 * m * r, 2 * m * r + 2 * r) for b in bs)
    switches = sum(b1 != b0 for b0, b1 in zip(bs, bs[1:]))
    regime_ok = a_ok and b_ok and switches <= 1
    note = "" if regime_ok else "outside the derivative-bound regime"

    mu_bound = 2.0 ** (-r / 2.0)
    mu_samples = []
    for k, (p, v, a, b) in enumerate(rows):
        if 0 < k < len(rows) - 1:
            dv = (rows[k + 1][1] - rows[k - 1][1]) / (rows[k + 1][0] - rows[k - 1][0])
            norm = abs(dv) * p
            brk = rows[k + 1][3] != rows[k - 1][3]
            mu_samples.append(DerivativeSample(p, v, a, b, norm, brk,
                                               norm <= slack * mu_bound))
        else:
            mu_samples.append(DerivativeSample(p, v, a, b, None, False, True))

    lam = lambda_sequence(m, r)
    lrows = _scan_interval(lam, 2.0 ** (r - 1.0) * lam, grid, r)
    lam_bound = 2.0 ** (r / 2.0 + 2.0)
    lam_samples = []
    for k, (p, v, a, b) in enumerate(lrows):
        if 0 < k < len(lrows) - 1:
            dv = (lrows[k + 1][1] - lrows[k - 1][1]) / (lrows[k + 1][0] - lrows[k - 1][0])
            norm = abs(dv) * math.sqrt(p)
            brk = lrows[k + 1][3] != lrows[k - 1][3] or lrows[k + 1][2] != lrows[k - 1][2]
            lam_samples.append(DerivativeSample(p, v, a, b, norm, brk,
                                                norm <= slack * lam_bound))
        else:
            lam_samples.append(DerivativeSample(p, v, a, b, None, False, True))

    return DerivativeReport(
        r=r, m=m, regime_ok=regime_ok, regime_note=note,
        mu_bound=mu_bound, mu_samples=mu_samples, mu_breakpoints=switches,
        lam_bound=lam_bound, lam_samples=lam_samples,
    )
