#!/usr/bin/env python3
"""Monte Carlo cross-checks of the closed forms.

Three experiments: threshold play on the seven-state game against its
strategic-form payoff, the state-blind profile against the same value, and
the informed-game profile against its cycle closed form.
"""

import argparse
import sys

from beliefgames import analytics, catalog
from beliefgames import montecarlo as mc


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--episodes", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    lam = 0.01
    gamma = catalog.gamma()
    for a, b in ((2, 2), (4, 4), (3, 6)):
        res = mc.simulate(gamma, mc.StrategySpec("threshold-s", {"a": a}),
                          mc.StrategySpec("threshold-t", {"b": b}), lam,
                          args.episodes, seed=args.seed)
        exact = analytics.g_lambda(a, b, lam)
        print(f"threshold ({a},{b}) lam={lam}: sim={res.mean:.5f}+-{res.se:.5f} "
              f"exact={exact:.5f}  z={(res.mean - exact) / res.se:+.2f}")

    lam = 2.0 ** -9
    res = mc.simulate(catalog.state_blind(), mc.StrategySpec("state-blind-sigma"),
                      mc.StrategySpec("state-blind-tau"), lam, args.episodes,
                      seed=args.seed)
    target = analytics.threshold_value(analytics.ThresholdGame(lam))
    print(f"state-blind lam=2^-9: sim={res.mean:.5f}+-{res.se:.5f} "
          f"value={target:.5f}  z={(res.mean - target) / res.se:+.2f}")

    for k in (10, 11):
        lam = 2.0 ** -k
        res = mc.informed_eval(lam, args.episodes, seed=args.seed)
        oracle = mc.informed_profile_value(lam)
        print(f"informed lam=2^-{k}: sim={res.mean:.5f}+-{res.se:.5f} "
              f"oracle={oracle:.5f}  z={(res.mean - oracle) / res.se:+.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
