#!/usr/bin/env python3
"""Sweep the endpoint counterexample across r and d: fitted window-ratio
slopes against 1/(rd) + 1 - 1/r, showing the sign flip at r = (d-1)/d."""

import argparse

from curvelab.sharpness import endpoint_scaling_experiment, predicted_endpoint_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--r-values", type=float, nargs="+", default=[0.40, 0.45, 0.50, 0.55, 0.60])
    ap.add_argument("--k-min", type=int, default=6)
    ap.add_argument("--k-max", type=int, default=14)
    ap.add_argument("--out", default=None, help="CSV path for the last run")
    args = ap.parse_args()

    deltas = [2.0**-k for k in range(args.k_min, args.k_max + 1)]
    print(f"d = {args.d}, deltas 2^-{args.k_min}..2^-{args.k_max}")
    print(f"{'r':>6} {'slope':>10} {'predicted':>10} {'diverges':>9}")
    rep = None
    for r in args.r_values:
        rep = endpoint_scaling_experiment(args.d, r, 2 * r, 2 * r, deltas)
        print(
            f"{r:6.3f} {rep.fitted['slope']:10.4f} "
            f"{predicted_endpoint_exponent(args.d, r):10.4f} {str(rep.flags['diverges']):>9}"
        )
    if args.out and rep is not None:
        rep.to_csv(args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
