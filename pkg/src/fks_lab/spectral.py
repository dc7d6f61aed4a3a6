"""Pseudospectral integrator for the fractional Keller-Segel equation on a
periodic box, with blow-up detection.

The fractional Laplacian is the Fourier multiplier -|kappa|^alpha. The
aggregation drift K_eps * rho is a linear (zero-padded) convolution so the
long-range kernel does not wrap around the box.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import ModelParams
from .diagnostics import DiagnosticsRecord, DiagnosticsSpec, record, spectral_tail_fraction
from .grid import Domain, GridField
from .kernel import k_eps

log = logging.getLogger(__name__)


class CFLViolation(RuntimeError):
    def __init__(self, dt, admissible):
        super().__init__(f"dt={dt:g} exceeds the advective limit {admissible:g}")
        self.dt = dt
        self.admissible = admissible


class InvalidInitialDatum(ValueError):
    pass


@dataclass
class SolverConfig:
    dt: float = 1e-3
    T: float = 1.0
    cfl: float = 0.5
    dealias: bool = True
    eps_kernel: float | None = None  # None -> one grid cell
    blowup_linf_factor: float = 1e3
    blowup_tail_fraction: float = 0.1
    diag_stride: int = 10
    detect_blowup: bool = True
    min_dt_fraction: float = 1e-3  # cfl collapse once the admissible dt drops below this * dt
    negativity_abort: float = 1e-3
    # negativity while L^inf has grown by this factor is read as loss of
    # resolution at a collapse, i.e. blow-up, rather than a numerical failure
    resolution_loss_growth: float = 4.0

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0:
            raise ValueError("dt and T must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be >= 1")

    def eps_for(self, domain: Domain) -> float:
        return domain.h if self.eps_kernel is None else self.eps_kernel


@dataclass
class Outcome:
    status: str  # completed | blowup | cfl_collapse | numerical_failure
    t: float
    reason: str = ""
    steps: int = 0


@dataclass
class RunResult:
    trajectory: list = field(default_factory=list)
    outcome: Outcome | None = None
    final: GridField | None = None


def _check_alpha(alpha):
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")


@lru_cache(maxsize=32)
def _multiplier(domain: Domain, alpha: float) -> np.ndarray:
    return -domain.kappa_abs ** alpha


def frac_laplacian(field: GridField, alpha: float) -> GridField:
    """Lap^{alpha/2} as the multiplier -|kappa|^alpha."""
    _check_alpha(alpha)
    dom = field.domain
    out = np.fft.ifftn(_multiplier(dom, alpha) * np.fft.fftn(field.values)).real
    return GridField(out, dom)


@lru_cache(maxsize=16)
def _kernel_hat(domain: Domain, a: float, eps: float) -> np.ndarray:
    """rfft of K_eps sampled on the doubled grid of offsets, one slab per component."""
    n, h, d = domain.N, domain.h, domain.d
    m = np.fft.fftfreq(2 * n) * 2 * n  # 0..N-1, -N..-1
    grids = np.meshgrid(*([m * h] * d), indexing="ij")
    z = np.stack(grids, axis=-1)
    kz = k_eps(z, a, eps)
    return np.stack([np.fft.rfftn(kz[..., c]) for c in range(d)])


def aggregation_drift(rho: GridField, a: float, eps: float) -> list[np.ndarray]:
    """(K_eps * rho) on the grid, one array per component."""
    dom = rho.domain
    n, d = dom.N, dom.d
    khat = _kernel_hat(dom, float(a), float(eps))
    pad = np.zeros((2 * n,) * d)
    pad[(slice(0, n),) * d] = rho.values
    rh = np.fft.rfftn(pad)
    crop = (slice(0, n),) * d
    out = []
    for c in range(d):
        conv = np.fft.irfftn(khat[c] * rh, s=pad.shape, axes=tuple(range(d)))
        out.append(conv[crop] * dom.cell_volume)
    return out


@lru_cache(maxsize=32)
def _dealias_mask(domain: Domain) -> np.ndarray:
    return domain.mode_index <= domain.N // 3


@lru_cache(maxsize=32)
def _derivative_factors(domain: Domain) -> tuple:
    # odd derivatives drop the Nyquist mode to keep the output real
    out = []
    for k in domain.wavenumbers:
        kk = k.copy()
        kk[np.abs(np.abs(kk) - np.pi / domain.h) < 1e-9 * np.pi / domain.h] = 0.0
        out.append(1j * kk)
    return tuple(out)


def _advection_hat(rho: GridField, params: ModelParams, cfg: SolverConfig):
    """Fourier coefficients of lambda div((K_eps * rho) rho) and max |lambda drift|."""
    dom = rho.domain
    if params.lam == 0:
        return np.zeros(dom.shape, dtype=complex), 0.0
    u = aggregation_drift(rho, params.a, cfg.eps_for(dom))
    umax = params.lam * float(max(np.abs(c).max() for c in u))
    dk = _derivative_factors(dom)
    # the drift is exact at the nodes but not periodic (it jumps across the box
    # edge), so only the product is truncated; filtering u itself rings
    acc = np.zeros(dom.shape, dtype=complex)
    for c in range(dom.d):
        acc += dk[c] * np.fft.fftn(u[c] * rho.values)
    if cfg.dealias:
        acc *= _dealias_mask(dom)
    acc *= params.lam
    acc.flat[0] = 0.0
    return acc, umax


def rhs(rho: GridField, params: ModelParams, cfg: SolverConfig) -> GridField:
    """Lap^{alpha/2} rho + lambda div((K_eps * rho) rho)."""
    dom = rho.domain
    adv, _ = _advection_hat(rho, params, cfg)
    tot = _multiplier(dom, params.alpha) * np.fft.fftn(rho.values) + adv
    tot.flat[0] = 0.0
    return GridField(np.fft.ifftn(tot).real, dom)


def admissible_dt(umax: float, domain: Domain, cfg: SolverConfig) -> float:
    return math.inf if umax == 0 else cfg.cfl * domain.h / umax


def _advance(rho: GridField, params: ModelParams, cfg: SolverConfig, dt: float, strict: bool):
    dom = rho.domain
    adv, umax = _advection_hat(rho, params, cfg)
    lim = admissible_dt(umax, dom, cfg)
    if dt > lim:
        if strict:
            raise CFLViolation(dt, lim)
        dt = lim
    rh = np.fft.fftn(rho.values)
    new_hat = np.exp(_multiplier(dom, params.alpha) * dt) * (rh + dt * adv)
    return GridField(np.fft.ifftn(new_hat).real, dom), new_hat, dt, lim


def step(rho: GridField, params: ModelParams, cfg: SolverConfig, dt: float | None = None) -> GridField:
    """One exponential Euler step: explicit advection, exact diffusion factor."""
    dt = cfg.dt if dt is None else dt
    if dt == 0:
        return rho.copy()
    new, _, _, _ = _advance(rho, params, cfg, dt, strict=True)
    return new


def validate_initial(rho0: GridField, tol: float = 1e-10):
    v = rho0.values
    if not np.all(np.isfinite(v)):
        raise InvalidInitialDatum("initial datum has non-finite values")
    m = rho0.mass()
    if m <= 0:
        raise InvalidInitialDatum(f"initial mass must be positive, got {m}")
    if v.min() < -tol * v.max():
        raise InvalidInitialDatum(f"initial datum is negative (min {v.min():g})")


def run(rho0: GridField, params: ModelParams, cfg: SolverConfig,
        diag: DiagnosticsSpec | None = None) -> RunResult:
    """Integrate to cfg.T or until blow-up / CFL collapse / failure is detected.

    The step is min(dt, CFL limit); diagnostics are taken at t = 0, every
    ``diag_stride`` steps and at the final time.
    """
    validate_initial(rho0)
    dom = rho0.domain
    if diag is None:
        diag = DiagnosticsSpec(alpha=params.alpha)
    rho = rho0.copy()
    linf0 = float(np.abs(rho0.values).max())
    traj = [record(rho, 0.0, diag, cfg.dealias)]
    t, n = 0.0, 0
    outcome = None
    while outcome is None:
        remaining = cfg.T - t
        if remaining <= 1e-12 * cfg.T:
            outcome = Outcome("completed", t, steps=n)
            break
        dt_try = min(cfg.dt, remaining)
        new, new_hat, dt, lim = _advance(rho, params, cfg, dt_try, strict=False)
        if dt < dt_try and dt < cfg.min_dt_fraction * cfg.dt:
            outcome = Outcome("cfl_collapse", t, f"admissible dt {lim:.3g}", n)
            break
        t = t + dt if dt < remaining else cfg.T
        n += 1
        rho = new
        v = rho.values
        reason = None
        if not np.all(np.isfinite(v)):
            reason = "non-finite values"
        elif cfg.detect_blowup:
            linf = float(np.abs(v).max())
            if linf > cfg.blowup_linf_factor * linf0:
                reason = f"L^inf {linf:.3g} > {cfg.blowup_linf_factor:g} * initial"
            else:
                tail = spectral_tail_fraction(v, dom, cfg.dealias, new_hat)
                if tail > cfg.blowup_tail_fraction:
                    reason = f"spectral tail fraction {tail:.3g}"
        if reason is not None:
            outcome = Outcome("blowup", t, reason, n)
        elif v.min() < -cfg.negativity_abort * v.max():
            growth = float(np.abs(v).max()) / linf0
            if cfg.detect_blowup and growth >= cfg.resolution_loss_growth:
                outcome = Outcome("blowup", t, f"resolution loss (negativity {v.min():.3g}, "
                                               f"L^inf growth {growth:.3g})", n)
            else:
                outcome = Outcome("numerical_failure", t, f"negativity {v.min():.3g}", n)
        if outcome is not None or n % cfg.diag_stride == 0 or t >= cfg.T:
            if np.all(np.isfinite(v)):
                traj.append(record(rho, t, diag, cfg.dealias, new_hat))
    if traj[-1].t != t and np.all(np.isfinite(rho.values)):
        traj.append(record(rho, t, diag, cfg.dealias))
    log.info("run finished: %s at t=%.4g after %d steps", outcome.status, outcome.t, outcome.steps)
    return RunResult(traj, outcome, rho)
