#!/usr/bin/env python3
"""Fit the sublevel-measure decay |{|P'-1| < h}| ~ h^(1/m) for constructed
polynomials with prescribed max root order m."""

import argparse

import numpy as np

from curvelab.cli import _known_order_poly, levelset_resolution
from curvelab.polynomials import fit_decay_exponent, level_set_measure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    hs = [2.0**-k for k in range(4, 15)]
    print(f"{'m':>3} {'root':>8} {'slope':>9} {'1/m':>7}")
    for m in args.orders:
        for _ in range(args.count):
            P, r, c_abs = _known_order_poly(rng, m)
            Q = P.derivative().sub_constant(1.0)
            R = abs(r) + 2.0
            res = levelset_resolution(2 * R, min(hs), c_abs, m)
            pts = [(h, level_set_measure(Q.eval, h, (-R, R), resolution=res)) for h in hs]
            slope, _, _ = fit_decay_exponent(pts)
            print(f"{m:3d} {r:8.3f} {slope:9.4f} {1.0 / m:7.4f}")


if __name__ == "__main__":
    main()
