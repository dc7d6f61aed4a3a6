#!/usr/bin/env python3
"""Blow-up time against lambda in the a > alpha regime (d = 1, alpha = 0.8, a = 1.2)."""
import argparse

from fks_lab.constants import ModelParams, regime_label
from fks_lab.grid import Domain, gaussian
from fks_lab.spectral import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, nargs="+", default=[0.05, 0.5, 2.0, 5.0, 10.0, 20.0, 40.0])
    ap.add_argument("--T", type=float, default=1.0)
    args = ap.parse_args()
    dom = Domain(1, 4.0, 512)
    rho0 = gaussian(dom, 0.25)
    print(f"regime: {regime_label(1.2, 0.8)}")
    print(f"{'lambda':>8} {'status':<18} {'t_end':>8}")
    for lam in args.lam:
        p = ModelParams(1, 0.8, 1.2, lam)
        out = run(rho0, p, SolverConfig(dt=1e-3, T=args.T, diag_stride=20)).outcome
        print(f"{lam:>8g} {out.status:<18} {out.t:>8.4f}")


if __name__ == "__main__":
    main()
