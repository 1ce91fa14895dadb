import csv
import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from beliefgames import analytics
from beliefgames.analytics import (CompactSolution, ThresholdGame,
                                   ThresholdScanError, compact_payoff,
                                   compact_value, derivative_check, f_hat,
                                   f_lambda, g_lambda, geometric_transform,
                                   optimal_thresholds, r_star, threshold_value)


def test_f_lambda_basics():
    assert f_lambda(0, 0.3) == 0.0
    assert f_lambda(1, 0.5) == pytest.approx(1.0 / 12.0, abs=1e-15)
    assert f_lambda(200, 0.01) < 1e-6
    with pytest.raises(ValueError):
        f_lambda(3, 0.0)
    with pytest.raises(ValueError):
        f_lambda(3, 1.0)
    with pytest.raises(ValueError):
        f_lambda(-1, 0.5)


def test_f_lambda_no_overflow_for_huge_n():
    assert f_lambda(10_000, 0.01) == 0.0


def test_g_lambda_edges():
    assert g_lambda(1, 0, 0.5) == 1.0
    assert g_lambda(5, 0, 0.01) == 1.0
    a = 4
    lam = 0.01
    assert g_lambda(a, a, lam) == pytest.approx(1.0 / (1.0 + f_lambda(a, lam)),
                                                abs=1e-15)


def test_g_lambda_monotone_in_quit_weights():
    # payoff rises with player 1's weight and falls with player 2's
    lam = 0.003
    pairs = [(2, 6), (3, 6), (5, 6), (6, 6), (8, 6)]
    vals = [g_lambda(a, 6, lam) for a, _ in pairs]
    fs = [f_lambda(a, lam) for a, _ in pairs]
    for (f1, v1), (f2, v2) in zip(zip(fs, vals), zip(fs[1:], vals[1:])):
        assert (f2 - f1) * (v2 - v1) >= 0
    bs = [0, 2, 4, 6, 8, 12]
    vals = [g_lambda(6, b, lam) for b in bs]
    fsb = [f_lambda(b, lam) for b in bs]
    for (f1, v1), (f2, v2) in zip(zip(fsb, vals), zip(fsb[1:], vals[1:])):
        assert (f2 - f1) * (v1 - v2) >= 0


def test_geometric_transform_values():
    for lam in (0.5, 0.01, 1e-5):
        assert geometric_transform(0, lam) == pytest.approx(1.0, abs=1e-12)
        assert geometric_transform(1, lam) == pytest.approx(
            (1.0 - lam) / (1.0 + lam), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=60),
       st.floats(min_value=1e-6, max_value=0.9))
def test_f_hat_identity(n, lam):
    assert f_lambda(n, lam) == pytest.approx(
        (1.0 - lam * lam) * f_hat(2.0 ** -n, lam), abs=1e-12)


def test_f_hat_boundaries():
    assert f_hat(0.0, 0.3) == 0.0
    assert f_hat(1.0, 0.3) == 0.0


def test_r_star_derivative_sign_and_ratio():
    for lam in (1e-4, 1e-5, 1e-6, 1e-7):
        rs = r_star(lam)
        assert abs(analytics._h(rs, lam)) <= 1e-12
        assert 0.9 <= rs / math.sqrt(2.0 * lam) <= 1.1
    lam = 1e-4
    rs = r_star(lam)
    delta = rs / 10.0
    assert f_hat(rs - delta, lam) < f_hat(rs, lam) > f_hat(rs + delta, lam)


def test_h_at_one():
    for lam in (0.5, 0.01, 1e-6):
        assert analytics._h(1.0, lam) == pytest.approx(-(1.0 + lam), abs=1e-15)


def test_unimodality_sampled():
    lam = 1e-4
    rs = r_star(lam)
    import numpy as np
    left = np.linspace(rs / 100, rs, 100)
    right = np.linspace(rs, 1.0, 100)
    fl = [f_hat(r, lam) for r in left]
    fr = [f_hat(r, lam) for r in right]
    assert all(a < b for a, b in zip(fl, fl[1:]))
    assert all(a > b for a, b in zip(fr, fr[1:]))


def test_asymptotic_expansion_remainder_vanishes():
    for c in (0.5, 1.0, 2.0):
        rems = []
        for k in (4, 6, 8, 10):
            lam = 10.0 ** -k
            rem = (f_hat(c * math.sqrt(2 * lam), lam) - 1.0
                   + (c + 1.0 / c) * math.sqrt(2 * lam)) / math.sqrt(lam)
            rems.append(abs(rem))
        assert all(a > b for a, b in zip(rems, rems[1:]))
        assert rems[-1] < 1e-3


def test_optimal_thresholds_frozen():
    pick = optimal_thresholds(ThresholdGame(2.0 ** -13))
    assert (pick.a_star, pick.b_star) == (6, 6)
    pick = optimal_thresholds(ThresholdGame(2.0 ** -15))
    assert pick.a_star == 7
    assert pick.b_star in (6, 8)
    assert set(pick.b_ties) <= {6, 8}


def test_optimal_thresholds_same_grid():
    for lam in (2.0 ** -9, 2.0 ** -14):
        pick = optimal_thresholds(ThresholdGame(lam, 3, 3))
        assert pick.a_star == pick.b_star


def test_optimal_thresholds_unbracketed_peak_errors():
    with pytest.raises(ThresholdScanError):
        optimal_thresholds(ThresholdGame(2.0 ** -20), n_max=6)


def test_threshold_value_limits():
    v6 = threshold_value(ThresholdGame(2.0 ** -25))
    assert abs(v6 - 0.5) < 1e-3
    w6 = threshold_value(ThresholdGame(2.0 ** -27))
    assert abs(w6 - 5.0 / 9.0) < 5e-3


def test_threshold_value_stretched_r2():
    target = (2.0 ** 2 + 2.0 ** -2) / (2.0 ** 2 + 2.0 ** -2 + 2.0)
    assert target == pytest.approx(0.68)
    vals = [threshold_value(ThresholdGame(2.0 ** -(8 * m + 5), 2, 4))
            for m in (3, 4)]
    assert abs(vals[-1] - target) < 5e-3
    assert abs(vals[-1] - target) < abs(vals[0] - target)


def test_compact_payoff_edges():
    for lam in (0.5, 1.0 / 16.0):
        for x in (0.0, 0.3, 1.0):
            assert compact_payoff(x, 0.0, lam) == pytest.approx(1.0, abs=1e-14)
    # interior saddle point at lam = 1/4 sits at exit intensity 1/3
    lam = 0.25
    x_star = (math.sqrt(lam) - lam) / (1.0 - lam)
    assert x_star == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert compact_payoff(1.0 / 3.0, 1.0 / 3.0, 0.25) == pytest.approx(0.75, abs=1e-14)


def test_compact_payoff_saddle_structure():
    lam = 1.0 / 16.0
    x_star = (math.sqrt(lam) - lam) / (1.0 - lam)
    center = compact_payoff(x_star, x_star, lam)
    import numpy as np
    for z in np.linspace(0.0, 1.0, 50):
        assert compact_payoff(z, x_star, lam) <= center + 1e-12
        assert compact_payoff(x_star, z, lam) >= center - 1e-12


def test_compact_value_even_sequence_hits_half():
    sol = compact_value(2.0 ** -20)
    assert isinstance(sol, CompactSolution)
    assert abs(sol.value - 0.5) <= 2e-3
    assert sol.y_choice == pytest.approx(2.0 ** -10, rel=1e-12)


def test_compact_value_grid_misalignment_levels():
    # the 4-power grid straddles sqrt(lam) at ratio 2 when log2(1/lam) = 2 mod 4
    # (limit 5/9) and at ratio sqrt(2) for odd log2(1/lam) (limit 9 - 6*sqrt(2))
    v_59 = compact_value(2.0 ** -22).value
    assert abs(v_59 - 5.0 / 9.0) <= 5e-3
    v_mid = compact_value(2.0 ** -21).value
    assert abs(v_mid - (9.0 - 6.0 * math.sqrt(2.0))) <= 5e-3
    v_mid2 = compact_value(2.0 ** -23).value
    assert abs(v_mid2 - (9.0 - 6.0 * math.sqrt(2.0))) <= 5e-3


def test_compact_payoff_at_bracketing_intensities():
    # against an opponent at sqrt(mu), both exits 2*sqrt(mu) and sqrt(mu)/2
    # pay 5/9 in the limit; what keeps compact_value away from 5/9 at most
    # discounts is that the 4-power grid rarely lands on those points
    for m in (8, 10):
        mu = 2.0 ** -(2 * m)
        x = (math.sqrt(mu) - mu) / (1.0 - mu)
        for y in (2.0 * math.sqrt(mu), 0.5 * math.sqrt(mu)):
            assert compact_payoff(x, y, mu) == pytest.approx(5.0 / 9.0,
                                                             abs=4.0 * 2.0 ** -m)


def test_sweep_closed_form_oscillation():
    rep = analytics.sweep(sequence="lambda_m", m_from=3, m_to=6)
    vals = [row.value for row in rep.rows]
    gaps = [abs(v - 0.5) for v in vals]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))
    rep = analytics.sweep(sequence="mu_m", m_from=3, m_to=6)
    gaps = [abs(row.value - 5.0 / 9.0) for row in rep.rows]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))


def test_sweep_csv_schema():
    rep = analytics.sweep(lams=[2.0 ** -9, 2.0 ** -5])
    text = rep.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["lambda", "value", "a_star", "b_star", "method",
                       "error_bound"]
    assert len(rows) == 3
    # descending discounts, exact dyadic round trip
    assert float(rows[1][0]) == 2.0 ** -5
    assert float(rows[2][0]) == 2.0 ** -9


def test_sweep_both_methods_agree():
    rep = analytics.sweep(lams=[2.0 ** -5, 2.0 ** -9], method="both",
                          max_nodes=512)
    by_lam = {}
    for row in rep.rows:
        by_lam.setdefault(row.lam, {})[row.method] = row
    for lam, pair in by_lam.items():
        vi = pair["value-iteration"]
        closed = pair["closed-form"]
        assert vi.discrepancy is not None
        assert vi.discrepancy <= 1e-6 + vi.error_bound
        # quit indices recovered from the iterated profile match the scan
        assert (vi.a_star, vi.b_star) == (closed.a_star, closed.b_star)


def test_derivative_check_r4():
    rep = derivative_check(r=4, grid=17)
    assert rep.regime_ok
    assert rep.mu_breakpoints <= 1
    assert rep.mu_compliance() >= 0.95
    assert all(s.within for s in rep.lam_samples if s.normalized is not None
               and not s.breakpoint)
    assert rep.mu_bound == 0.25


def test_derivative_check_rejects_small_r():
    with pytest.raises(ValueError):
        derivative_check(r=1)


def test_sweep_argument_validation():
    with pytest.raises(ValueError):
        analytics.sweep(game="gamma", r=2, lams=[0.1])
    with pytest.raises(ValueError):
        analytics.sweep(lams=[0.1], method="nonsense")
    with pytest.raises(ValueError):
        analytics.sweep(sequence="lambda_m", m_from=2)
    with pytest.raises(ValueError):
        analytics.sweep(lams=[])
