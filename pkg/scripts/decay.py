#!/usr/bin/env python3
"""Free (lambda = 0) decay of L^p norms against the predicted exponent -(d/alpha)(1 - 1/p)."""
import argparse

from fks_lab.constants import ModelParams
from fks_lab.diagnostics import DiagnosticsSpec, decay_fit
from fks_lab.grid import Domain, gaussian
from fks_lab.spectral import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 4.0])
    ap.add_argument("--L", type=float, default=64.0)
    ap.add_argument("--N", type=int, default=1024)
    ap.add_argument("--T", type=float, default=10.0)
    args = ap.parse_args()
    dom = Domain(1, args.L, args.N)
    res = run(gaussian(dom, 0.2), ModelParams(1, args.alpha, 0.5, 0.0),
              SolverConfig(dt=0.05, T=args.T, diag_stride=1), DiagnosticsSpec(p_list=tuple(args.p), alpha=args.alpha))
    print(f"outcome: {res.outcome.status} at t={res.outcome.t:.4g}")
    print(f"{'p':>6} {'fitted':>10} {'predicted':>10} {'r^2':>8}")
    for p in args.p:
        slope, r2 = decay_fit([(r.t, r.lp[p]) for r in res.trajectory], window=(1.0, args.T))
        print(f"{p:>6g} {slope:>10.4f} {-(1 / args.alpha) * (1 - 1 / p):>10.4f} {r2:>8.5f}")


if __name__ == "__main__":
    main()
