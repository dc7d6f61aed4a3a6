"""Interacting alpha-stable particle system for the regularised equation.

Each particle carries mass M0/N and moves by
    dX_i = -lambda (M0/N) sum_{j != i} K_eps(X_i - X_j) dt + dZ_i
discretised with Euler-Maruyama. Particles live on R^d; a grid is only
used when the empirical density is deposited for comparison.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, DiagnosticsSpec, entropy, lp_norm
from .grid import Domain, GridField
from .kernel import k_eps
from .stable import StableSpec, make_rng, sample_increment

log = logging.getLogger(__name__)

_CHUNK_PAIRS = 4_000_000


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    mass_per_particle: float
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2:
            raise ValueError("positions must be an N x d array")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("particle positions must be finite")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @property
    def mass(self) -> float:
        return self.n * self.mass_per_particle

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.positions.copy(), self.mass_per_particle, self.time)


@dataclass
class ParticleConfig:
    N: int = 1000
    dt: float = 1e-2
    T: float = 1.0
    eps: float | None = None  # None -> N^{-1/(2d)}
    lam: float = 1.0
    alpha: float = 1.5
    a: float = 0.5
    seed: int = 0
    mass: float = 1.0
    d: int = 1
    antithetic: bool = False
    noise: bool = True  # test hook: False integrates the drift ODE only
    diag_stride: int = 10

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.antithetic and self.N % 2:
            raise ValueError("antithetic pairing needs an even N")
        if self.dt < 0 or self.T <= 0:
            raise ValueError("dt must be nonnegative and T positive")
        if self.eps is not None and self.eps <= 0:
            raise ValueError(f"eps must be strictly positive, got {self.eps}")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be >= 1")

    @property
    def eps_value(self) -> float:
        return self.N ** (-1.0 / (2 * self.d)) if self.eps is None else self.eps


def drift(ens: ParticleEnsemble, cfg: ParticleConfig, rows: slice | None = None) -> np.ndarray:
    """-lambda (M0/N) sum_j K_eps(X_i - X_j) for the requested rows (all by default).

    The diagonal term vanishes because K_eps(0) = 0.
    """
    x = ens.positions
    rows = slice(0, ens.n) if rows is None else rows
    xi = x[rows]
    out = np.zeros_like(xi)
    if ens.n < 2 or cfg.lam == 0:
        return out
    eps = cfg.eps_value
    step = max(1, _CHUNK_PAIRS // max(1, ens.n * ens.d))
    for s in range(0, xi.shape[0], step):
        diff = xi[s:s + step, None, :] - x[None, :, :]
        if ens.d == 1:
            # same as k_eps, without the temporaries
            w = np.abs(diff[..., 0])
            np.maximum(w, eps, out=w)
            np.power(w, -cfg.a, out=w)
            out[s:s + step, 0] = np.einsum("ij,ij->i", diff[..., 0], w)
        else:
            out[s:s + step] = k_eps(diff, cfg.a, eps).sum(axis=1)
    out *= -cfg.lam * ens.mass_per_particle
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite particle drift")
    return out


def _full_drift(ens: ParticleEnsemble, cfg: ParticleConfig) -> np.ndarray:
    if not cfg.antithetic:
        return drift(ens, cfg)
    # the second half mirrors the first, so its drift is the mirrored drift
    half = ens.n // 2
    top = drift(ens, cfg, slice(0, half))
    return np.concatenate([top, -top])


def _noise(ens: ParticleEnsemble, cfg: ParticleConfig, dt: float, rng) -> np.ndarray:
    spec = StableSpec(cfg.alpha, dt, ens.d)
    if not cfg.antithetic:
        return sample_increment(spec, rng, ens.n)
    z = sample_increment(spec, rng, ens.n // 2)
    return np.concatenate([z, -z])


def em_step(ens: ParticleEnsemble, cfg: ParticleConfig, rng, dt: float | None = None) -> ParticleEnsemble:
    """X <- X + drift dt + stable increment."""
    dt = cfg.dt if dt is None else dt
    if dt == 0:
        return ens.copy()
    x = ens.positions + dt * _full_drift(ens, cfg)
    if cfg.noise:
        x = x + _noise(ens, cfg, dt, rng)
    return ParticleEnsemble(x, ens.mass_per_particle, ens.time + dt)


def empirical_density(ens: ParticleEnsemble, domain: Domain) -> tuple[GridField, int]:
    """Histogram onto the grid with cells centred on the nodes.

    Returns the field and the number of particles that fell outside the box.
    """
    if ens.d != domain.d:
        raise ValueError("ensemble and domain dimensions differ")
    idx = np.floor((ens.positions + domain.L) / domain.h + 0.5).astype(np.int64)
    # the cell around -L also collects the strip just below +L (periodic seam)
    idx[idx == domain.N] = 0
    inside = np.all((idx >= 0) & (idx < domain.N), axis=1)
    flat = np.ravel_multi_index(tuple(idx[inside].T), domain.shape)
    counts = np.bincount(flat, minlength=math.prod(domain.shape)).reshape(domain.shape)
    values = counts * (ens.mass_per_particle / domain.cell_volume)
    outside = int(ens.n - inside.sum())
    if outside > 0.01 * ens.n:
        log.warning("%d of %d particles lie outside the box", outside, ens.n)
    return GridField(values, domain), outside


def sample_from_field(rho: GridField, n: int, rng) -> np.ndarray:
    """n positions drawn from a nonnegative grid density (uniform within cells)."""
    rng = make_rng(rng)
    dom = rho.domain
    w = np.clip(rho.values.ravel(), 0.0, None)
    cells = rng.choice(w.size, size=n, p=w / w.sum())
    idx = np.stack(np.unravel_index(cells, dom.shape), axis=1)
    jitter = rng.uniform(-0.5, 0.5, size=(n, dom.d))
    return -dom.L + (idx + jitter) * dom.h


def gaussian_sampler(sigma: float = 1.0, center=None):
    def draw(n, d, rng):
        c = np.zeros(d) if center is None else np.broadcast_to(np.asarray(center, float), (d,))
        return c + sigma * rng.standard_normal((n, d))
    return draw


def two_bumps_sampler(sep: float = 2.0, sigma: float = 0.5):
    def draw(n, d, rng):
        x = sigma * rng.standard_normal((n, d))
        x[:, 0] += np.where(rng.random(n) < 0.5, -sep / 2, sep / 2)
        return x
    return draw


def ring_sampler(radius: float = 2.0, sigma: float = 0.3):
    def draw(n, d, rng):
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = np.abs(radius + sigma * rng.standard_normal(n))
        return g * r[:, None]
    return draw


SAMPLERS = {"gaussian": gaussian_sampler, "two-bumps": two_bumps_sampler, "ring": ring_sampler}


def initial_ensemble(rho0, cfg: ParticleConfig, rng) -> ParticleEnsemble:
    """Build the starting ensemble from a GridField, a sampler callable or a preset name."""
    rng = make_rng(rng)
    n = cfg.N // 2 if cfg.antithetic else cfg.N
    if isinstance(rho0, GridField):
        if rho0.domain.d != cfg.d:
            raise ValueError("initial field and config dimensions differ")
        x = sample_from_field(rho0, n, rng)
    elif isinstance(rho0, str):
        try:
            x = SAMPLERS[rho0]()(n, cfg.d, rng)
        except KeyError:
            raise ValueError(f"unknown preset {rho0!r}; choose from {sorted(SAMPLERS)}") from None
    elif callable(rho0):
        x = np.asarray(rho0(n, cfg.d, rng), dtype=float).reshape(n, cfg.d)
    else:
        raise TypeError("rho0 must be a GridField, a preset name or a sampler callable")
    if cfg.antithetic:
        x = np.concatenate([x, -x])
    return ParticleEnsemble(x, cfg.mass / cfg.N, 0.0)


@dataclass
class ParticleRun:
    records: list = field(default_factory=list)
    cluster: list = field(default_factory=list)  # (t, max cell occupancy fraction)
    final: ParticleEnsemble | None = None
    snapshots: list = field(default_factory=list)


def cluster_indicator(ens: ParticleEnsemble, domain: Domain) -> float:
    """Largest fraction of particles sharing one grid cell."""
    f, _ = empirical_density(ens, domain)
    return float(f.values.max() * domain.cell_volume / ens.mass)


def particle_record(ens: ParticleEnsemble, spec: DiagnosticsSpec, domain: Domain | None) -> DiagnosticsRecord:
    x = ens.positions
    w = ens.mass_per_particle
    r = np.sqrt(np.sum(x * x, axis=1))
    bracket = np.sqrt(1.0 + r * r)
    mk = {k: float(w * np.sum(bracket ** k)) for k in spec.k_list}
    y_int = float(w * np.sum(spec.blowup.weight(r))) if spec.blowup is not None else math.nan
    nan = math.nan
    linf = mn = ent = nan
    lp = {p: nan for p in spec.p_list}
    if domain is not None:
        f, _ = empirical_density(ens, domain)
        linf, mn = float(f.values.max()), float(f.values.min())
        ent = entropy(f)
        lp = {p: lp_norm(f, p) for p in spec.p_list}
    return DiagnosticsRecord(t=ens.time, mass=ens.mass, linf=linf, min_val=mn, entropy=ent, lp=lp,
                             mk=mk, hs_half=nan, y_int=y_int, tail_fraction=nan, clamped=0.0)


def run_particles(rho0, cfg: ParticleConfig, diag: DiagnosticsSpec | None = None,
                  domain: Domain | None = None, snapshot_stride: int = 0) -> ParticleRun:
    """Euler-Maruyama integration to cfg.T with diagnostics every ``diag_stride`` steps.

    The clustering indicator needs ``domain``; snapshots are positions copied
    every ``snapshot_stride`` steps (0 disables them).
    """
    diag = DiagnosticsSpec() if diag is None else diag
    init_rng, step_rng = (make_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    ens = initial_ensemble(rho0, cfg, init_rng)
    out = ParticleRun()

    def observe(e):
        out.records.append(particle_record(e, diag, domain))
        if domain is not None:
            out.cluster.append((e.time, cluster_indicator(e, domain)))

    def snap(e):
        if snapshot_stride:
            out.snapshots.append((e.time, e.positions.copy()))

    observe(ens)
    snap(ens)
    nsteps = max(1, int(round(cfg.T / cfg.dt))) if cfg.dt > 0 else 0
    for n in range(1, nsteps + 1):
        ens = em_step(ens, cfg, step_rng)
        if n == nsteps:
            ens.time = cfg.T
        if n % cfg.diag_stride == 0 or n == nsteps:
            observe(ens)
        if snapshot_stride and (n % snapshot_stride == 0 or n == nsteps):
            snap(ens)
    out.final = ens
    return out


def write_snapshots(path, snapshots) -> None:
    """CSV with header ``t,id,x0[,x1[,x2]]``, one row per particle per snapshot."""
    if not snapshots:
        raise ValueError("no snapshots to write")
    d = snapshots[0][1].shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "id"] + [f"x{i}" for i in range(d)])
        for t, x in snapshots:
            for i, row in enumerate(x):
                w.writerow([repr(float(t)), i] + [repr(float(v)) for v in row])
