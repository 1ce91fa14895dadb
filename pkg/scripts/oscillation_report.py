#!/usr/bin/env python3
"""Reproduce the discounted-value oscillation tables.

Writes one CSV per game/sequence into the output directory and prints a
summary of how fast each sequence closes in on its limit. Closed form only,
so the whole run is instant; add --cross-check to also run the fixed-point
solver on the feasible (large-discount) rows.
"""

import argparse
import pathlib
import sys

from beliefgames import analytics


def limit_for(sequence: str, r: int) -> float:
    if sequence == "lambda_m":
        return 0.5
    return (2.0 ** r + 2.0 ** -r) / (2.0 ** r + 2.0 ** -r + 2.0)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="reports")
    ap.add_argument("--m-from", type=int, default=2)
    ap.add_argument("--m-to", type=int, default=6)
    ap.add_argument("--cross-check", action="store_true",
                    help="also value-iterate rows with discount >= 2^-17")
    args = ap.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    for r in (1, 2):
        for sequence in ("lambda_m", "mu_m"):
            rep = analytics.sweep(game="gamma" if r == 1 else "gamma_r", r=r,
                                  sequence=sequence, m_from=args.m_from,
                                  m_to=args.m_to)
            name = f"gamma{'' if r == 1 else f'_r{r}'}_{sequence}.csv"
            with open(outdir / name, "w", newline="") as fh:
                rep.write_csv(fh)
            limit = limit_for(sequence, r)
            print(f"\n{name}   (limit {limit:.6f})")
            for row in rep.rows:
                print(f"  lambda={row.lam:.3e}  value={row.value:.8f}  "
                      f"gap={abs(row.value - limit):.2e}  "
                      f"a*={row.a_star} b*={row.b_star}")

    if args.cross_check:
        print("\ncross-check against the fixed-point solver (lambda >= 2^-17):")
        lams = [2.0 ** -k for k in (5, 9, 13, 17)]
        rep = analytics.sweep(lams=lams, method="both")
        for row in rep.rows:
            if row.method == "value-iteration":
                print(f"  lambda={row.lam:.3e}  |closed - iterated| = "
                      f"{row.discrepancy:.2e} (bound {row.error_bound:.1e})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
