"""Command-line front end: solve, sweep, simulate, reduce, catalog, verify."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import acceptance, analytics, beliefs, catalog, model, montecarlo, solver


def parse_discount(text: str) -> float:
    """Parse a discount given as 2^-k, num/den, or decimal; dyadic forms are exact."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        if base.strip() != "2":
            raise ValueError(f"only base-2 exponent discounts supported, got {text!r}")
        return 2.0 ** int(exp)
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _game_spec(args) -> model.GameSpec:
    if getattr(args, "spec", None):
        return model.load_game(args.spec)
    params = {"r": args.r} if args.game == "gamma_r" else {}
    return catalog.get(args.game, **params).spec


def _emit(data, path: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_strategy(text: str) -> montecarlo.StrategySpec:
    if ":" in text:
        kind, arg = text.split(":", 1)
        key = "a" if kind.endswith("-s") or "sigma" in kind else "b"
        return montecarlo.StrategySpec(kind, {key: int(arg)})
    return montecarlo.StrategySpec(text)


def cmd_catalog(args) -> int:
    if args.dump:
        params = {"r": args.r} if args.dump == "gamma_r" else {}
        entry = catalog.get(args.dump, **params)
        _emit(model.game_to_dict(entry.spec), args.output)
    else:
        for name in catalog.names():
            print(name)
    return 0


def cmd_reduce(args) -> int:
    spec = _game_spec(args)
    if args.root:
        weights = {k: model.parse_prob(v) for k, v in json.loads(args.root).items()}
        root = beliefs.Belief(weights)
    else:
        root = beliefs.initial_belief(spec)
    chain = beliefs.reduce(spec, root, args.max_nodes, args.tail_mass)
    _emit(beliefs.chain_to_dict(chain), args.output)
    return 0


def cmd_solve(args) -> int:
    spec = _game_spec(args)
    chain = beliefs.reduce(spec, beliefs.initial_belief(spec), args.max_nodes)
    labels = [catalog.node_label(spec, b) for b in chain.nodes]
    if args.lam is not None:
        lam = parse_discount(args.lam)
        vf, profile = solver.discounted_value(chain, lam, args.tol)
        out = {
            "game": spec.name, "lambda": lam,
            "root_value": float(vf.values[chain.root]),
            "error_bound": vf.error_bound, "residual": vf.residual,
            "iterations": vf.iterations,
            "values": {lab: float(v) for lab, v in zip(labels, vf.values)},
            "profile": {
                lab: {
                    "x": {a: profile.x[nd, ii] for ii, a in enumerate(spec.actions1)
                          if profile.x[nd, ii] > 0},
                    "y": {a: profile.y[nd, jj] for jj, a in enumerate(spec.actions2)
                          if profile.y[nd, jj] > 0},
                }
                for nd, lab in enumerate(labels)
            },
        }
    else:
        vfs = solver.finite_horizon(chain, args.horizon, keep_all=False)
        vf = vfs[-1]
        out = {
            "game": spec.name, "horizon": args.horizon,
            "root_value": float(vf.values[chain.root]),
            "error_bound": vf.error_bound,
            "values": {lab: float(v) for lab, v in zip(labels, vf.values)},
        }
    _emit(out, args.output)
    return 0


def cmd_sweep(args) -> int:
    lams = [parse_discount(t) for t in args.lambdas.split(",")] if args.lambdas else None
    report = analytics.sweep(
        game=args.game, r=args.r, lams=lams, sequence=args.sequence,
        m_from=args.m_from, m_to=args.m_to, method=args.method,
        n_max=args.n_max, max_nodes=args.max_nodes, tol=args.tol)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            report.write_csv(fh)
    else:
        sys.stdout.write(report.to_csv())
    worst = max((r.discrepancy for r in report.rows if r.discrepancy is not None),
                default=None)
    if worst is not None:
        print(f"max |closed - value-iteration| = {worst:.3e}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    spec = _game_spec(args)
    lam = parse_discount(args.lam)
    res = montecarlo.simulate(spec, _parse_strategy(args.sigma),
                            _parse_strategy(args.tau), lam, args.episodes,
                            horizon=args.horizon, seed=args.seed)
    _emit({"game": spec.name, "lambda": lam, "mean": res.mean, "se": res.se,
           "episodes": res.episodes, "horizon": res.horizon, "seed": res.seed,
           "absorb_stats": res.absorb_stats}, args.output)
    return 0


def cmd_verify(args) -> int:
    names = args.criteria.split(",") if args.criteria else None
    results = acceptance.run_criteria(names)
    for res in results:
        print(f"{res.name} {'PASS' if res.passed else 'FAIL'} "
              f"({res.seconds:.1f}s) {res.detail}")
    if args.output:
        _emit([{"name": r.name, "passed": r.passed, "detail": r.detail,
                "seconds": r.seconds} for r in results], args.output)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beliefgames")
    sub = p.add_subparsers(dest="command", required=True)

    def add_game(sp, with_spec=True):
        sp.add_argument("--game", default="gamma", choices=catalog.names())
        sp.add_argument("--r", type=int, default=1)
        if with_spec:
            sp.add_argument("--spec", help="game-spec JSON file (overrides --game)")

    sp = sub.add_parser("catalog", help="list built-in games or dump one")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--dump", choices=catalog.names())
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_catalog)

    sp = sub.add_parser("reduce", help="enumerate the belief chain of a game")
    add_game(sp)
    sp.add_argument("--max-nodes", type=int, default=4096)
    sp.add_argument("--tail-mass", type=float, default=None)
    sp.add_argument("--root", help="belief as JSON {state: prob}")
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_reduce)

    sp = sub.add_parser("solve", help="discounted or n-stage value on the chain")
    add_game(sp)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--lambda", dest="lam", help="discount (2^-13, 1/8192, 0.05)")
    group.add_argument("--horizon", type=int)
    sp.add_argument("--max-nodes", type=int, default=4096)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("sweep", help="value across a discount sequence (CSV)")
    sp.add_argument("--game", default="gamma", choices=["gamma", "gamma_r"])
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--lambdas", help="comma-separated discounts")
    sp.add_argument("--sequence", choices=["lambda_m", "mu_m"])
    sp.add_argument("--m-from", type=int)
    sp.add_argument("--m-to", type=int)
    sp.add_argument("--method", default="closed-form",
                    choices=["closed-form", "value-iteration", "both"])
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--max-nodes", type=int, default=4096)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte Carlo play of a game")
    add_game(sp)
    sp.add_argument("--sigma", required=True,
                    help="player-1 strategy, e.g. threshold-s:4 or state-blind-sigma")
    sp.add_argument("--tau", required=True)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--episodes", type=int, default=10000)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("verify", help="run the acceptance criteria")
    sp.add_argument("--criteria", help="comma-separated subset, e.g. A1,A5")
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_verify)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # noqa: BLE001 - machine-readable error record
        json.dump({"error": str(exc), "type": type(exc).__name__}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
