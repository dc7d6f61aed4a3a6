#!/usr/bin/env python3
"""Second-moment rate for alpha = a = 2, d = 2 against 2dM0(1 - lambda M0/(2d))."""
import argparse

from fks_lab.constants import ModelParams
from fks_lab.diagnostics import DiagnosticsSpec, virial_audit
from fks_lab.grid import Domain, gaussian
from fks_lab.spectral import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam-mass", type=float, nargs="+", default=[0.0, 1.0, 2.0, 4.0, 6.0, 8.0])
    ap.add_argument("--N", type=int, default=128)
    args = ap.parse_args()
    dom = Domain(2, 8.0, args.N)
    rho0 = gaussian(dom, 1.0)
    cfg = SolverConfig(dt=2e-3, T=0.1, diag_stride=5, detect_blowup=False)
    print(f"{'lam*M0':>8} {'measured':>10} {'predicted':>10} {'rel err':>9}")
    for lm in args.lam_mass:
        p = ModelParams(2, 2.0, 2.0, lm)
        a = virial_audit(run(rho0, p, cfg, DiagnosticsSpec(k_list=(2.0,))).trajectory, p)
        print(f"{lm:>8g} {a.details['measured']:>10.4f} {a.details['predicted']:>10.4f} {a.details['relative_error']:>9.2%}")


if __name__ == "__main__":
    main()
