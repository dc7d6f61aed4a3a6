"""Monitored functionals of a density snapshot, rate fitting, and audits of
the a-priori estimates along a recorded trajectory."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .constants import ModelParams, critical_mass_fair, sphere_area
from .grid import Domain, GridField


class InsufficientData(ValueError):
    pass


class RegimeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class BlowupMomentSpec:
    """Weight m(x) = phi(|x|) |x|^a + (1 - phi(|x|)) |x|^k.

    phi is 1 on [0, r], 0 beyond 2r, and a quintic smoothstep in between.
    """

    a: float
    k: float
    r: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.r < 0.5:
            raise ValueError(f"linking radius must lie in (0, 1/2), got {self.r}")
        if self.k < 0 or self.a <= 0:
            raise ValueError("need a > 0 and k >= 0")

    def phi(self, u):
        t = np.clip((np.asarray(u, dtype=float) - self.r) / self.r, 0.0, 1.0)
        return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def weight(self, u):
        u = np.asarray(u, dtype=float)
        ph = self.phi(u)
        return ph * u ** self.a + (1.0 - ph) * u ** self.k


@dataclass
class DiagnosticsSpec:
    """What to record: L^p exponents, moment orders and the blow-up weight."""

    p_list: tuple = (2.0,)
    k_list: tuple = (0.5,)
    blowup: BlowupMomentSpec | None = None
    alpha: float | None = None


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    linf: float
    min_val: float
    entropy: float
    lp: dict = field(default_factory=dict)
    mk: dict = field(default_factory=dict)
    hs_half: float = math.nan
    y_int: float = math.nan
    tail_fraction: float = math.nan
    clamped: int = 0

    @property
    def y_blowup(self) -> float:
        """Y = M0 + int rho m."""
        return self.mass + self.y_int


def _cellwise(rho):
    if isinstance(rho, GridField):
        return rho.values, rho.domain
    raise TypeError("expected a GridField")


def lp_norm(rho: GridField, p: float) -> float:
    v, dom = _cellwise(rho)
    if math.isinf(p):
        return float(np.abs(v).max())
    return float((np.sum(np.abs(v) ** p) * dom.cell_volume) ** (1.0 / p))


def weighted_moment(rho: GridField, k: float) -> float:
    """M_k = int rho <x>^k with <x> = sqrt(1 + |x|^2)."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    v, dom = _cellwise(rho)
    w = (1.0 + dom.radius ** 2) ** (k / 2)
    return float(np.sum(v * w) * dom.cell_volume)


def entropy(rho: GridField) -> float:
    """int rho ln rho, with 0 ln 0 = 0 and negative cells clamped to 0."""
    v, dom = _cellwise(rho)
    pos = v > 0
    return float(np.sum(v[pos] * np.log(v[pos])) * dom.cell_volume)


def hs_seminorm_sq(f: GridField, s: float) -> float:
    """|f|^2_{H^s} = sum |kappa|^{2s} |f_hat|^2, normalised so that it equals
    -<Lap^s f, f> on the grid."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    v, dom = _cellwise(f)
    fh = np.fft.fftn(v)
    n_tot = v.size
    return float(np.sum(dom.kappa_abs ** (2 * s) * np.abs(fh) ** 2) * dom.cell_volume / n_tot)


def blowup_moment(rho: GridField, spec: BlowupMomentSpec) -> float:
    """int rho m; Y is this plus the mass."""
    v, dom = _cellwise(rho)
    return float(np.sum(v * spec.weight(dom.radius)) * dom.cell_volume)


def spectral_tail_fraction(values: np.ndarray, domain: Domain, dealias: bool = True,
                           values_hat: np.ndarray | None = None) -> float:
    """Share of spectral energy in the top third of the resolved modes.

    With dealiasing the resolved band is |n| <= N/3, otherwise |n| <= N/2.
    """
    fh = np.fft.fftn(values) if values_hat is None else values_hat
    e = np.abs(fh) ** 2
    nmax = domain.N // 3 if dealias else domain.N // 2
    tail = domain.mode_index > (2.0 * nmax / 3.0)
    tot = e.sum()
    return float(e[tail].sum() / tot) if tot > 0 else 0.0


def record(rho: GridField, t: float, spec: DiagnosticsSpec, dealias: bool = True,
           values_hat=None) -> DiagnosticsRecord:
    v, dom = rho.values, rho.domain
    rec = DiagnosticsRecord(
        t=float(t),
        mass=rho.mass(),
        linf=float(np.abs(v).max()),
        min_val=float(v.min()),
        entropy=entropy(rho),
        lp={float(p): lp_norm(rho, p) for p in spec.p_list},
        mk={float(k): weighted_moment(rho, k) for k in spec.k_list},
        clamped=int(np.count_nonzero(v < 0)),
    )
    if spec.alpha is not None:
        root = GridField(np.sqrt(np.clip(v, 0.0, None)), dom)
        rec.hs_half = hs_seminorm_sq(root, spec.alpha / 2)
    if spec.blowup is not None:
        rec.y_int = blowup_moment(rho, spec.blowup)
    rec.tail_fraction = spectral_tail_fraction(v, dom, dealias, values_hat)
    return rec


def decay_fit(series, window=None) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(t); returns (slope, r^2)."""
    arr = np.asarray(series, dtype=float)
    t, v = arr[:, 0], arr[:, 1]
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, v = t[sel], v[sel]
    if t.size < 8:
        raise InsufficientData(f"need at least 8 samples in the window, got {t.size}")
    if np.any(v <= 0) or np.any(t <= 0):
        raise InsufficientData("decay_fit needs positive times and values")
    x, y = np.log(t), np.log(v)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid ** 2) / ss_tot
    return float(slope), float(r2)


@dataclass
class AuditReport:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def _trapz_cumulative(t, f):
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def entropy_inequality_audit(trajectory, params: ModelParams, slack: float = 0.01) -> AuditReport:
    """Check S(t) + 4 (C - lambda M0)/C int_0^t |sqrt rho|^2_{H^{a/2}} <= S(0).

    C is the fair-competition threshold C_{a,d}; the records must carry
    ``hs_half``. The slack is relative to max(|S(0)|, |dissipation term|).
    """
    if abs(params.a - params.alpha) > 1e-12:
        raise RegimeMismatch("entropy audit requires a = alpha")
    if len(trajectory) < 2:
        raise InsufficientData("need at least two records")
    t = np.array([r.t for r in trajectory])
    s = np.array([r.entropy for r in trajectory])
    hs = np.array([r.hs_half for r in trajectory])
    if not np.all(np.isfinite(hs)):
        raise InsufficientData("records lack hs_half")
    m0 = trajectory[0].mass
    c = critical_mass_fair(params.d, params.a)
    coef = 4.0 * (c - params.lam * m0) / c
    diss = coef * _trapz_cumulative(t, hs)
    lhs = s + diss
    margin = s[0] - lhs
    scale = np.maximum(abs(s[0]), np.abs(diss))
    ok = bool(np.all(margin >= -slack * scale))
    ds = np.diff(s)
    monotone = bool(np.all(ds <= 1e-12 * np.maximum(1.0, np.abs(s[1:]))))
    return AuditReport("entropy_inequality", ok, {
        "C_crit_fair": c,
        "coefficient": coef,
        # t = 0 has zero margin by construction
        "worst_relative_margin": float(np.min(margin[1:] / np.maximum(scale[1:], 1e-300))),
        "entropy_monotone": monotone,
    })


def _linear_slope(t, y):
    slope, _ = np.polyfit(t, y, 1)
    return float(slope)


def virial_audit(trajectory, params: ModelParams) -> AuditReport:
    """Second-moment rate against 2 d M0 (1 - lambda M0 / (2d)) for alpha = a = 2.

    Uses int rho |x|^2 = M_2 - M_0, so the records must carry k = 2. The error
    is normalised by the pure-diffusion rate 2 d M0.
    """
    if not (params.alpha == 2 and params.a == 2):
        raise RegimeMismatch("virial audit requires alpha = a = 2")
    if len(trajectory) < 2:
        raise InsufficientData("need at least two records")
    if any(2.0 not in r.mk for r in trajectory):
        raise InsufficientData("records lack the k = 2 moment")
    t = np.array([r.t for r in trajectory])
    m2 = np.array([r.mk[2.0] - r.mass for r in trajectory])
    m0 = trajectory[0].mass
    d = params.d
    pred = virial_rate(d, m0, params.lam)
    meas = _linear_slope(t, m2)
    rel = abs(meas - pred) / (2 * d * m0)
    return AuditReport("virial", rel < 0.01, {"measured": meas, "predicted": pred, "relative_error": rel})


def virial_rate(d: int, m0: float, lam: float) -> float:
    return 2 * d * m0 * (1 - lam * m0 / (2 * d))


def moment_growth_audit(trajectory, params: ModelParams, k: float | None = None) -> AuditReport:
    """Fit an exponential envelope A e^{Bt} that dominates M_k(t)."""
    k = params.k if k is None else k
    lo = max(0.0, 1.0 - params.a)
    if not lo <= k < params.alpha:
        raise ValueError(f"moment order k={k} outside [{lo}, {params.alpha})")
    if len(trajectory) < 3:
        raise InsufficientData("need at least three records")
    t = np.array([r.t for r in trajectory])
    mk = np.array([r.mk[float(k)] for r in trajectory])
    b = max(_linear_slope(t, np.log(mk)), 0.0)
    a_env = float(np.max(mk * np.exp(-b * t)))
    env = a_env * np.exp(b * t)
    dominated = bool(np.all(mk <= env * (1 + 1e-12)))
    dt = t[1:] - t[0]
    lin_rate = float(np.max((mk[1:] - mk[0]) / dt)) if np.all(dt > 0) else math.nan
    ok = dominated and math.isfinite(a_env) and math.isfinite(b)
    return AuditReport("moment_growth", ok, {"A": a_env, "B": b, "linear_rate": lin_rate})


def comparability_audit(trajectory, k: float) -> AuditReport:
    """(1/2) Y <= M_k <= 2^{k/2} Y on every record, Y = M0 + int rho m."""
    worst_lo, worst_hi = math.inf, math.inf
    for r in trajectory:
        y, mk = r.y_blowup, r.mk[float(k)]
        worst_lo = min(worst_lo, mk - 0.5 * y)
        worst_hi = min(worst_hi, 2 ** (k / 2) * y - mk)
    ok = worst_lo >= 0 and worst_hi >= 0
    return AuditReport("comparability", ok, {"lower_gap": worst_lo, "upper_gap": worst_hi})


def interpolation_audit(rec: DiagnosticsRecord) -> AuditReport:
    """||rho||_r <= ||rho||_p^theta ||rho||_q^{1-theta} for recorded p < r < q."""
    ps = sorted(p for p in rec.lp if p >= 1)
    worst = math.inf
    for i, p in enumerate(ps):
        for j in range(i + 1, len(ps)):
            for l in range(j + 1, len(ps)):
                r, q = ps[j], ps[l]
                if math.isinf(q):
                    theta = p / r
                else:
                    theta = (1 / r - 1 / q) / (1 / p - 1 / q)
                bound = rec.lp[p] ** theta * rec.lp[q] ** (1 - theta)
                worst = min(worst, bound * (1 + 1e-12) - rec.lp[r])
    return AuditReport("interpolation", worst >= 0, {"worst_gap": worst})


@lru_cache(maxsize=None)
def entropy_normalizer(d: int, k: float) -> float:
    """lambda_k > 0 with int_{R^d} exp(-lambda_k <x>^k) dx = 1."""
    if k <= 0:
        raise ValueError("k must be positive")
    w = sphere_area(d)

    def total(lam):
        f = lambda r: r ** (d - 1) * math.exp(-lam * (1 + r * r) ** (k / 2))
        val, _ = integrate.quad(f, 0, math.inf, limit=200)
        return w * val - 1.0

    hi = 1.0
    while total(hi) > 0:
        hi *= 2
    lo = hi / 2
    while total(lo) < 0:
        lo /= 2
    return float(optimize.brentq(total, lo, hi, xtol=1e-14, rtol=1e-13))


def entropy_lower_bound_audit(rho: GridField, k: float) -> AuditReport:
    """int rho ln rho >= M0 ln M0 - lambda_k int rho <x>^k."""
    lam_k = entropy_normalizer(rho.domain.d, k)
    m0 = rho.mass()
    lhs = entropy(rho)
    rhs = m0 * math.log(m0) - lam_k * weighted_moment(rho, k)
    return AuditReport("entropy_lower_bound", lhs >= rhs, {"entropy": lhs, "bound": rhs, "lambda_k": lam_k})


class ConditionNotMet(ValueError):
    pass


def blowup_bound_eval(Y0, M0, lam, a, k, C1, C2) -> float:
    """Upper bound on the blow-up time from the closed Y differential inequality."""
    den = C2 * lam * M0 ** (2 * a / k) - C1 * Y0 ** (2 * (a / k - 1)) * M0
    if den <= 0:
        raise ConditionNotMet(f"smallness condition fails: denominator {den} <= 0")
    return k / (2 * a - k) * Y0 ** (2 * a / k - 1) / den
