#!/usr/bin/env python3
"""Randomized Whitney decomposition property sweep: disjointness, coverage
defect, the |J| <= dist <= 3|J| sandwich, and the pair inequalities."""

import argparse

import numpy as np

from curvelab.tiling import whitney_decompose, whitney_pair_properties, whitney_properties


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    violations = 0
    worst_far = 2.0
    cases = 0
    seed = args.seed
    while cases < args.count:
        local = np.random.default_rng(seed)
        seed += 1
        k = int(local.integers(1, 9))
        pts = np.sort(local.uniform(-10, 10, 2 * k))
        omega = [(pts[2 * i], pts[2 * i + 1]) for i in range(k) if pts[2 * i + 1] - pts[2 * i] > 1e-4]
        if not omega:
            continue
        cases += 1
        cells = whitney_decompose(omega)
        props = whitney_properties(cells, omega)
        rep = whitney_pair_properties(cells, omega, n_pairs=100, seed=seed)
        worst_far = min(worst_far, rep.fitted["worst_far_ratio"])
        if props["disjoint"] or props["sandwich"] or not props["coverage_ok"] or not rep.passed:
            violations += 1
            print(f"violation at seed {seed - 1}: {props}")
    print(f"{cases} random open sets, {violations} violations, worst far-pair ratio {worst_far:.5f}")


if __name__ == "__main__":
    main()
