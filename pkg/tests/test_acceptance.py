"""Acceptance suite: one [PASS]/[FAIL] line per criterion, then the assertion.

Run with pytest (the lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import acceptance_log  # noqa: E402
from oracles import pv_frac_lap_1d  # noqa: E402

from fks_lab.cli import main  # noqa: E402
from fks_lab.constants import (ModelParams, critical_mass_fair, hls_constant_diagonal,  # noqa: E402
                               hls_constant_diagonal_gamma_form, sobolev_constant,
                               sobolev_constant_gamma_form)
from fks_lab.diagnostics import (BlowupMomentSpec, DiagnosticsSpec, comparability_audit,  # noqa: E402
                                 decay_fit, entropy_inequality_audit, moment_growth_audit, virial_audit)
from fks_lab.grid import Domain, GridField, gaussian  # noqa: E402
from fks_lab.particles import ParticleConfig, empirical_density, run_particles  # noqa: E402
from fks_lab.spectral import SolverConfig, frac_laplacian, run  # noqa: E402
from fks_lab.stable import StableSpec, make_rng, sample_increment  # noqa: E402

# every solver and particle run made here, for the mass criterion
SOLVER_RUNS: list = []
PARTICLE_RUNS: list = []


def report(n, ok, msg):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {msg}"
    acceptance_log.LINES.append(line)
    print(line)
    assert ok, line


def solve(rho0, params, cfg, diag=None):
    res = run(rho0, params, cfg, diag)
    SOLVER_RUNS.append((rho0.mass(), res))
    return res


def particles(rho0, cfg, **kw):
    res = run_particles(rho0, cfg, **kw)
    PARTICLE_RUNS.append((cfg.mass, res))
    return res


def test_c01_fair_critical_mass():
    t0 = time.perf_counter()
    errs = [abs(critical_mass_fair(d, 2.0) - 2 * (d - 1)) / (2 * (d - 1)) for d in (3, 4, 5)]
    below = all(2 * (d - 1) < 2 * d for d in (3, 4, 5))
    el = time.perf_counter() - t0
    report(1, max(errs) < 1e-10 and below and el < 1.0,
           f"C_crit_fair(d, 2) vs 2(d-1), d=3..5, max rel err {max(errs):.2e}, below 2d: {below}, {el:.3f}s")


def test_c02_constant_cross_forms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 6))
        s = float(rng.uniform(1e-3, min(1.0, d / 2) - 1e-3))
        a = float(rng.uniform(1e-3, d - 1e-3))
        for x, y in ((sobolev_constant(d, s), sobolev_constant_gamma_form(d, s)),
                     (hls_constant_diagonal(d, a), hls_constant_diagonal_gamma_form(d, a))):
            worst = max(worst, abs(x - y) / abs(y))
    el = time.perf_counter() - t0
    report(2, worst < 5e-11 and el < 1.0,
           f"C_S and diagonal C_HLS, Gamma vs omega form on 20 random points, max rel diff {worst:.2e}, {el:.3f}s")


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_c03_fractional_laplacian():
    t0 = time.perf_counter()
    dom = Domain(1, 128.0, 512)
    f = lambda x: math.exp(-x * x / 2)
    u = GridField(np.exp(-dom.axis ** 2 / 2), dom)
    spec = frac_laplacian(u, 1.0).values
    sel = np.abs(dom.axis) <= dom.L / 2
    ref = np.array([pv_frac_lap_1d(f, x, 1.0, 1 / math.pi) for x in dom.axis[sel]])
    err = float(np.max(np.abs(spec[sel] - ref)) / np.max(np.abs(ref)))
    el = time.perf_counter() - t0
    report(3, err < 1e-4 and el < 30, f"spectral vs PV quadrature, alpha=1, N=512, interior rel err {err:.2e}, {el:.1f}s")


def test_c04_free_decay():
    t0 = time.perf_counter()
    dom = Domain(1, 64.0, 1024)
    res = solve(gaussian(dom, 0.2), ModelParams(1, 1.5, 0.5, 0.0), SolverConfig(dt=0.05, T=10.0, diag_stride=1),
                DiagnosticsSpec(p_list=(2.0,), alpha=1.5))
    slope, r2 = decay_fit([(r.t, r.lp[2.0]) for r in res.trajectory], window=(1.0, 10.0))
    rel = abs(slope + 1 / 3) / (1 / 3)
    el = time.perf_counter() - t0
    report(4, res.outcome.status == "completed" and rel < 0.05 and el < 60,
           f"lambda=0 L^2 decay exponent {slope:.4f} vs -1/3 (rel {rel:.2%}, r^2 {r2:.5f}), {el:.1f}s")


def test_c05_virial():
    t0 = time.perf_counter()
    dom = Domain(2, 8.0, 128)
    rho0 = gaussian(dom, 1.0)
    diag = DiagnosticsSpec(k_list=(2.0,))
    rate_cfg = SolverConfig(dt=2e-3, T=0.1, diag_stride=5, detect_blowup=False)
    errs, slopes = {}, {}
    for lm in (0.0, 2.0, 4.0, 8.0):
        p = ModelParams(2, 2.0, 2.0, lm)
        audit = virial_audit(solve(rho0, p, rate_cfg, diag).trajectory, p)
        errs[lm], slopes[lm] = audit.details["relative_error"], audit.details["measured"]
    rates_ok = all(errs[lm] < 0.01 for lm in (0.0, 2.0, 4.0))
    flip = slopes[8.0] < 0 < slopes[2.0]
    p8 = ModelParams(2, 2.0, 2.0, 8.0)
    det = solve(rho0, p8, SolverConfig(dt=2e-3, T=1.0, diag_stride=5), diag)
    free = solve(rho0, p8, SolverConfig(dt=2e-3, T=1.0, diag_stride=5, detect_blowup=False,
                                        negativity_abort=math.inf), diag)
    fired = det.outcome.status == "blowup" and det.outcome.t < free.outcome.t and free.outcome.status != "completed"
    el = time.perf_counter() - t0
    report(5, rates_ok and flip and fired and el < 300,
           f"virial rate errors {', '.join(f'{errs[k]:.2%}' for k in (0.0, 2.0, 4.0))} at lambda M0 = 0, d, 2d; "
           f"slope at 4d {slopes[8.0]:.3f}; detector fired at t={det.outcome.t:.3f}, "
           f"detector-free run ended {free.outcome.status} at t={free.outcome.t:.3f} < T=1, {el:.1f}s")


def test_c06_entropy_inequality():
    t0 = time.perf_counter()
    dom = Domain(2, 8.0, 128)
    rho0 = gaussian(dom, 1.0)
    cfg = SolverConfig(dt=2e-3, T=1.0, diag_stride=5)
    p = ModelParams(2, 1.5, 1.5, 0.5 * critical_mass_fair(2, 1.5))
    res = solve(rho0, p, cfg, DiagnosticsSpec(alpha=1.5))
    audit = entropy_inequality_audit(res.trajectory, p, slack=0.01)
    p0 = ModelParams(2, 1.5, 1.5, 0.0)
    res0 = solve(rho0, p0, cfg, DiagnosticsSpec(alpha=1.5))
    mono = entropy_inequality_audit(res0.trajectory, p0).details["entropy_monotone"]
    el = time.perf_counter() - t0
    ok = res.outcome.status == "completed" and audit.passed and mono and el < 300
    report(6, ok, f"entropy inequality at lambda M0 = C/2, worst relative margin "
                  f"{audit.details['worst_relative_margin']:.3e} (slack 1%); lambda=0 entropy monotone: {mono}, {el:.1f}s")


def test_c08_blowup_regime():
    t0 = time.perf_counter()
    dom = Domain(1, 4.0, 512)
    rho0 = gaussian(dom, 0.25)
    cfg = SolverConfig(dt=1e-3, T=1.0, diag_stride=20)
    lams = (5.0, 10.0, 20.0, 40.0)
    strong = [solve(rho0, ModelParams(1, 0.8, 1.2, lm), cfg).outcome for lm in lams]
    weak = [solve(rho0, ModelParams(1, 0.8, 1.2, lm / 100), cfg).outcome for lm in lams]
    times = [o.t for o in strong]
    fired = all(o.status == "blowup" for o in strong)
    done = all(o.status == "completed" for o in weak)
    decreasing = all(b < a for a, b in zip(times, times[1:]))
    el = time.perf_counter() - t0
    report(8, fired and done and decreasing,
           f"a=1.2 > alpha=0.8: blow-up times {', '.join(f'{t:.4f}' for t in times)} for lambda = 5..40; "
           f"lambda/100 runs completed: {done}, {el:.1f}s")


def test_c09_stable_sampler():
    t0 = time.perf_counter()
    dt, n = 0.3, 10 ** 6
    worst = 0.0
    for alpha, d in ((1.5, 1), (1.2, 2), (2.0, 2)):
        x = sample_increment(StableSpec(alpha, dt, d), make_rng(99), n)
        for xi in ([0.7] + [0.0] * (d - 1), [1.5] + [0.0] * (d - 1), [0.8] * d, [-1.2] + [2.0] * (d - 1)):
            xi = np.array(xi)
            c = np.cos(x @ xi)
            z = abs(c.mean() - math.exp(-dt * np.linalg.norm(xi) ** alpha)) / (c.std() / math.sqrt(n))
            worst = max(worst, z)
    # generator consistency at alpha = 1.5
    alpha = 1.5
    dom = Domain(1, 64.0, 2048)
    prof = lambda y: np.exp(-y * y / 2) / math.sqrt(2 * math.pi)
    lu = frac_laplacian(GridField(prof(dom.axis), dom), alpha).values
    z1 = sample_increment(StableSpec(alpha, 1.0, 1), make_rng(7), n)[:, 0]

    def estimate(x, h):
        zz = h ** (1 / alpha) * z1
        return (0.5 * (prof(x + zz) + prof(x - zz)).mean() - prof(x)) / h

    gen_err = 0.0
    for x0 in (0.0, 0.5, 1.0, 1.5, 2.5):
        i = int(np.argmin(np.abs(dom.axis - x0)))
        x = dom.axis[i]
        est = 2 * estimate(x, 0.01) - estimate(x, 0.02)
        gen_err = max(gen_err, abs(est - lu[i]) / abs(lu[i]))
    el = time.perf_counter() - t0
    report(9, worst < 3 and gen_err < 0.05 and el < 120,
           f"characteristic function max |z| {worst:.2f} (limit 3) at 1e6 samples; "
           f"generator vs frac_laplacian max rel err {gen_err:.2%}, {el:.1f}s")


@pytest.fixture(scope="module")
def mean_field():
    """PDE reference and particle runs for N = 500, 2000, 8000 (d = 1, a = 0.5, alpha = 1.5, lambda M0 = 1)."""
    t0 = time.perf_counter()
    dom = Domain(1, 16.0, 512)
    rho0 = gaussian(dom, 0.5)
    k = 0.5
    diag = DiagnosticsSpec(k_list=(k,), blowup=BlowupMomentSpec(0.5, k), alpha=1.5)
    params = ModelParams(1, 1.5, 0.5, 1.0, k=k)
    pde = solve(rho0, params, SolverConfig(dt=1e-3, T=0.5, diag_stride=50), diag)
    runs = {}
    for n in (500, 2000, 8000):
        cfg = ParticleConfig(N=n, dt=0.01, T=0.5, lam=1.0, alpha=1.5, a=0.5, seed=0, d=1, diag_stride=5)
        runs[n] = particles(rho0, cfg, diag=diag, domain=dom)
    return dict(dom=dom, pde=pde, runs=runs, params=params, k=k, elapsed=time.perf_counter() - t0)


def test_c10_mean_field(mean_field):
    dom, pde = mean_field["dom"], mean_field["pde"]
    dist = {}
    for n, pr in mean_field["runs"].items():
        emp, _ = empirical_density(pr.final, dom)
        dist[n] = float(dom.h * np.abs(emp.values - pde.final.values).sum())
    vals = [dist[n] for n in sorted(dist)]
    dec = all(b < a for a, b in zip(vals, vals[1:]))
    el = mean_field["elapsed"]
    report(10, pde.outcome.status == "completed" and dec and el < 300,
           f"L1(particles, PDE) at t=0.5: {', '.join(f'N={n}: {dist[n]:.4f}' for n in sorted(dist))}, {el:.1f}s")


def test_c11_moment_propagation(mean_field):
    k, params = mean_field["k"], mean_field["params"]
    trajs = [("PDE", mean_field["pde"].trajectory)] + [(f"N={n}", pr.records) for n, pr in mean_field["runs"].items()]
    env_ok = comp_ok = True
    parts = []
    for name, tr in trajs:
        env = moment_growth_audit(tr, params, k)
        comp = comparability_audit(tr, k)
        env_ok &= env.passed
        comp_ok &= comp.passed
        parts.append(f"{name} B={env.details['B']:.3g} gaps {comp.details['lower_gap']:.3g}/{comp.details['upper_gap']:.3g}")
    report(11, env_ok and comp_ok, f"M_0.5 under A e^(Bt) and inside the Y sandwich for {'; '.join(parts)}")


def test_c07_mass_conservation():
    # pytest keeps file order, so this sees every run above; run alone it makes its own
    if not SOLVER_RUNS:
        dom = Domain(1, 8.0, 128)
        solve(gaussian(dom, 0.5), ModelParams(1, 1.5, 0.5, 1.0), SolverConfig(dt=1e-3, T=0.2))
    if not PARTICLE_RUNS:
        particles("gaussian", ParticleConfig(N=300, dt=0.01, T=0.2))
    worst = 0.0
    for m0, res in SOLVER_RUNS:
        if res.outcome.status == "completed":
            worst = max(worst, max(abs(r.mass - m0) / m0 for r in res.trajectory))
    n_done = sum(res.outcome.status == "completed" for _, res in SOLVER_RUNS)
    exact = all(len({r.mass for r in pr.records}) == 1 for _, pr in PARTICLE_RUNS)
    ulps = max(abs(pr.records[0].mass - m0) / math.ulp(m0) for m0, pr in PARTICLE_RUNS)
    report(7, worst < 1e-10 and exact and ulps <= 4,
           f"{n_done} completed solver runs, max rel mass drift {worst:.2e}; {len(PARTICLE_RUNS)} particle runs "
           f"with bitwise constant mass (offset from M0 {ulps:.0f} ulp)")


def test_c12_determinism(tmp_path):
    model = "model.d = 1\nmodel.alpha = 1.5\nmodel.a = 0.5\nmodel.lambda = 1.0\ngrid.N = 128\n"
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(model + "solver.T = 0.2\nsolver.dt = 0.002\ndiagnostics.p_list = 1, 2, inf\n"
                           "diagnostics.k_list = 0.5, 2\nparticles.N = 500\nparticles.T = 0.2\n"
                           "particles.snapshot_stride = 10\n")
    same, count = True, 0
    for mode in ("solve", "particles", "compare"):
        outs = [tmp_path / f"{mode}_{i}" for i in (0, 1)]
        for o in outs:
            main([mode, "--config", str(cfg), "--out", str(o), "--seed", "2718"])
        for csv in sorted(outs[0].glob("*.csv")):
            count += 1
            same &= csv.read_bytes() == (outs[1] / csv.name).read_bytes()
    report(12, same and count >= 6, f"{count} CSV files from solve, particles and compare byte-identical across two runs: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
