#!/usr/bin/env python3
"""L1 distance between the particle histogram and the PDE solution as N grows."""
import argparse

import numpy as np

from fks_lab.constants import ModelParams
from fks_lab.grid import Domain, gaussian
from fks_lab.particles import ParticleConfig, empirical_density, run_particles
from fks_lab.spectral import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[250, 500, 1000, 2000, 4000, 8000])
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--T", type=float, default=0.5)
    args = ap.parse_args()
    dom = Domain(1, 16.0, 512)
    rho0 = gaussian(dom, 0.5)
    pde = run(rho0, ModelParams(1, 1.5, 0.5, 1.0), SolverConfig(dt=1e-3, T=args.T, diag_stride=50))
    print(f"PDE: {pde.outcome.status}")
    print(f"{'N':>6} {'mean L1':>9} {'sd':>8}")
    for n in args.N:
        d = []
        for seed in range(args.seeds):
            cfg = ParticleConfig(N=n, dt=0.01, T=args.T, lam=1.0, alpha=1.5, a=0.5, seed=seed, d=1)
            emp, _ = empirical_density(run_particles(rho0, cfg, domain=dom).final, dom)
            d.append(dom.h * np.abs(emp.values - pde.final.values).sum())
        print(f"{n:>6} {np.mean(d):>9.4f} {np.std(d):>8.4f}")


if __name__ == "__main__":
    main()
