"""Command-line harness: ``python -m fks_lab <mode> --config FILE --out DIR``.

Each run writes into its output directory:
  config.txt      effective configuration (re-parses to the same value)
  constants.txt   closed-form constants and the regime classification
  outcome.json    status, exit code and stop time
  *.csv           diagnostics time series
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import MODES, ConfigError, ExperimentConfig, dump_config, parse_config
from .constants import ModelParams, constants_report
from .diagnostics import BlowupMomentSpec, DiagnosticsSpec
from .grid import Domain, GridField, make_preset, read_fks1
from .particles import ParticleConfig, empirical_density, run_particles, write_snapshots
from .spectral import SolverConfig, run

log = logging.getLogger(__name__)

EXIT_CODES = {"completed": 0, "blowup": 10, "cfl_collapse": 20, "numerical_failure": 30}
EXIT_CONFIG = 64


# ---------------------------------------------------------------- builders

def model_params(cfg: ExperimentConfig) -> ModelParams:
    m = cfg.model
    return ModelParams(d=m.d, alpha=m.alpha, a=m.a, lam=m.lam, k=m.k)


def solver_config(cfg: ExperimentConfig) -> SolverConfig:
    s = cfg.solver
    return SolverConfig(dt=s.dt, T=s.T, cfl=s.cfl, dealias=s.dealias, eps_kernel=s.eps_kernel,
                        blowup_linf_factor=s.blowup_linf_factor,
                        blowup_tail_fraction=s.blowup_tail_fraction, diag_stride=s.diag_stride,
                        detect_blowup=s.detect_blowup, min_dt_fraction=s.min_dt_fraction,
                        negativity_abort=s.negativity_abort,
                        resolution_loss_growth=s.resolution_loss_growth)


def particle_config(cfg: ExperimentConfig) -> ParticleConfig:
    p, m = cfg.particles, cfg.model
    return ParticleConfig(N=p.N, dt=p.dt, T=p.T, eps=p.eps, lam=m.lam, alpha=m.alpha, a=m.a,
                          seed=cfg.output.seed, mass=m.mass, d=m.d, antithetic=p.antithetic,
                          diag_stride=p.diag_stride)


def diagnostics_spec(cfg: ExperimentConfig) -> DiagnosticsSpec:
    dg = cfg.diagnostics
    bu = None
    if dg.blowup_k is not None:
        bu = BlowupMomentSpec(a=cfg.model.a, k=dg.blowup_k, r=dg.blowup_r)
    return DiagnosticsSpec(p_list=tuple(sorted(dg.p_list)), k_list=tuple(sorted(dg.k_list)),
                           blowup=bu, alpha=cfg.model.alpha)


def initial_field(cfg: ExperimentConfig) -> GridField:
    ini = cfg.initial
    if ini.file:
        return read_fks1(ini.file)
    dom = Domain(cfg.model.d, cfg.grid.L, cfg.grid.N)
    kwargs = {"gaussian": {"sigma": ini.sigma},
              "two-bumps": {"sep": ini.sep, "sigma": ini.sigma},
              "ring": {"radius": ini.radius, "sigma": ini.sigma}}[ini.preset]
    return make_preset(ini.preset, dom, mass=cfg.model.mass, **kwargs)


# ---------------------------------------------------------------- output

def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _tag(v: float) -> str:
    return format(float(v), "g")


def csv_header(spec: DiagnosticsSpec) -> list[str]:
    cols = ["t", "mass", "linf", "min", "entropy", "hs_half", "y_blowup", "tail_fraction"]
    cols += [f"lp_{_tag(p)}" for p in sorted(spec.p_list)]
    cols += [f"mk_{_tag(k)}" for k in sorted(spec.k_list)]
    return cols


def write_diagnostics_csv(path, records, spec: DiagnosticsSpec) -> None:
    lines = [",".join(csv_header(spec))]
    for r in records:
        row = [r.t, r.mass, r.linf, r.min_val, r.entropy, r.hs_half, r.y_blowup, r.tail_fraction]
        row += [r.lp[float(p)] for p in sorted(spec.p_list)]
        row += [r.mk[float(k)] for k in sorted(spec.k_list)]
        lines.append(",".join(_num(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    """Column name -> values, for post-processing written CSVs."""
    rows = Path(path).read_text().strip().splitlines()
    head = rows[0].split(",")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]], ndmin=2)
    return {h: data[:, i] for i, h in enumerate(head)}


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_common(cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(dump_config(cfg))
    (out / "constants.txt").write_text(constants_report(model_params(cfg)).to_text())


def _outcome_json(mode, outcome, extra=None) -> dict:
    obj = {"mode": mode, "status": outcome.status, "exit_code": EXIT_CODES[outcome.status],
           "t": outcome.t, "reason": outcome.reason, "steps": outcome.steps}
    obj.update(extra or {})
    return obj


# ---------------------------------------------------------------- modes

def _run_constants(cfg, out):
    _write_common(cfg, out)
    _write_json(out / "outcome.json", {"mode": "constants", "status": "completed", "exit_code": 0})
    return 0


def _run_solve(cfg, out):
    _write_common(cfg, out)
    spec = diagnostics_spec(cfg)
    res = run(initial_field(cfg), model_params(cfg), solver_config(cfg), spec)
    write_diagnostics_csv(out / "diagnostics.csv", res.trajectory, spec)
    _write_json(out / "outcome.json", _outcome_json("solve", res.outcome))
    return EXIT_CODES[res.outcome.status]


def _particle_run(cfg, spec):
    p = cfg.particles
    rho0 = initial_field(cfg)
    return run_particles(rho0, particle_config(cfg), spec, domain=rho0.domain,
                         snapshot_stride=p.snapshot_stride), rho0.domain


def _write_particles(out, prun, spec, prefix=""):
    write_diagnostics_csv(out / f"{prefix}diagnostics.csv", prun.records, spec)
    lines = ["t,cluster"] + [f"{_num(t)},{_num(c)}" for t, c in prun.cluster]
    (out / f"{prefix}cluster.csv").write_text("\n".join(lines) + "\n")
    if prun.snapshots:
        write_snapshots(out / f"{prefix}snapshots.csv", prun.snapshots)


def _run_particles(cfg, out):
    _write_common(cfg, out)
    spec = diagnostics_spec(cfg)
    prun, _ = _particle_run(cfg, spec)
    _write_particles(out, prun, spec)
    _write_json(out / "outcome.json", {"mode": "particles", "status": "completed", "exit_code": 0,
                                       "t": prun.final.time, "N": prun.final.n,
                                       "max_cluster": max(c for _, c in prun.cluster)})
    return 0


def _run_compare(cfg, out):
    """PDE and particles to a common final time; L1 distance between them there."""
    _write_common(cfg, out)
    spec = diagnostics_spec(cfg)
    solver = solver_config(cfg)
    solver.T = cfg.particles.T
    res = run(initial_field(cfg), model_params(cfg), solver, spec)
    write_diagnostics_csv(out / "pde_diagnostics.csv", res.trajectory, spec)
    prun, dom = _particle_run(cfg, spec)
    _write_particles(out, prun, spec, prefix="particles_")
    extra = {}
    if res.outcome.status == "completed":
        emp, outside = empirical_density(prun.final, dom)
        extra = {"l1_distance": float(np.abs(emp.values - res.final.values).sum() * dom.cell_volume),
                 "particles_outside": outside}
    _write_json(out / "outcome.json", _outcome_json("compare", res.outcome, extra))
    return EXIT_CODES[res.outcome.status]


def _scan_one(job):
    cfg, lam_mass, out = job
    cfg = parse_config(dump_config(cfg))
    cfg.model.lam = lam_mass / cfg.model.mass
    code = _run_solve(cfg, out)
    obj = json.loads((out / "outcome.json").read_text())
    return lam_mass, obj["status"], obj["t"], obj["reason"], code


def worker_count(n_jobs: int) -> int:
    raw = os.environ.get("FKS_THREADS", "")
    cap = int(raw) if raw.strip().isdigit() and int(raw) > 0 else (os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def _run_scan(cfg, out):
    _write_common(cfg, out)
    jobs = [(cfg, lm, out / f"run_{i:03d}") for i, lm in enumerate(cfg.scan.lam_mass)]
    nw = worker_count(len(jobs))
    if nw == 1:
        rows = [_scan_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            rows = list(pool.map(_scan_one, jobs))
    lines = ["lam_mass,status,t_end,reason"]
    lines += [f"{_num(lm)},{st},{_num(t)},\"{reason}\"" for lm, st, t, reason, _ in rows]
    (out / "phase.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "outcome.json", {"mode": "blowup-scan", "status": "completed", "exit_code": 0,
                                       "phase": [{"lam_mass": lm, "status": st, "t": t}
                                                 for lm, st, t, _, _ in rows]})
    return 0


_DISPATCH = {"constants": _run_constants, "solve": _run_solve, "particles": _run_particles,
             "compare": _run_compare, "blowup-scan": _run_scan}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run the configured mode and return the process exit code."""
    return _DISPATCH[cfg.mode](cfg, Path(cfg.output.dir))


def phase_table(out_dir) -> str:
    rows = Path(out_dir, "phase.csv").read_text().strip().splitlines()[1:]
    lines = [f"{'lam*M0':>10}  {'status':<18} t_end"]
    for r in rows:
        lm, st, t = r.split(",")[:3]
        lines.append(f"{float(lm):>10.4g}  {st:<18} {float(t):.4g}")
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fks_lab", description="Fractional Keller-Segel numerical lab")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--seed", help="random seed (overrides output.seed)")
    ap.add_argument("--preset", help="initial datum preset (overrides initial.preset)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"mode": args.mode}
    for key, val in (("output.dir", args.out), ("output.seed", args.seed), ("initial.preset", args.preset)):
        if val is not None:
            overrides[key] = val
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        code = run_experiment(cfg)
    except OSError as exc:
        print(f"I/O error at {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    out = Path(cfg.output.dir)
    if cfg.mode == "constants":
        print((out / "constants.txt").read_text(), end="")
    elif cfg.mode == "blowup-scan":
        print(phase_table(out))
    else:
        print((out / "outcome.json").read_text(), end="")
    return code
