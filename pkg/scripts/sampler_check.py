#!/usr/bin/env python3
"""Empirical characteristic function of stable increments against exp(-dt |xi|^alpha)."""
import argparse
import math

import numpy as np

from fks_lab.stable import StableSpec, make_rng, sample_increment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--dt", type=float, default=0.3)
    ap.add_argument("--samples", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = make_rng(args.seed)
    print(f"{'alpha':>6} {'|xi|':>6} {'empirical':>10} {'exact':>10} {'z':>6}")
    for alpha in args.alpha:
        x = sample_increment(StableSpec(alpha, args.dt, args.d), rng, args.samples)
        for r in (0.5, 1.0, 2.0):
            c = np.cos(r * x[:, 0])
            exact = math.exp(-args.dt * r ** alpha)
            z = (c.mean() - exact) / (c.std() / math.sqrt(args.samples))
            print(f"{alpha:>6g} {r:>6g} {c.mean():>10.5f} {exact:>10.5f} {z:>6.2f}")


if __name__ == "__main__":
    main()
