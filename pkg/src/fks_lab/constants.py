"""Closed-form constants, exponents and regime thresholds for the fractional
Keller-Segel model ``d_t rho = Lap^{alpha/2} rho + lambda div((K * rho) rho)``
with ``K(x) = x / |x|^a``.

Everything here is a pure function of scalars. The Gamma function is a
Lanczos approximation so the whole module reduces to a handful of Gamma
ratios that can be cross-checked against an independent implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# Lanczos coefficients, g = 7, n = 9 (Numerical Recipes / Godfrey).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# tolerance used to decide a == alpha
FAIR_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the validity domain of a closed-form constant."""


def gamma_fn(x: float) -> float:
    """Gamma function, ~15 significant digits away from the poles."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def sphere_area(s: float) -> float:
    """omega_s = 2 pi^{s/2} / Gamma(s/2), continued to real (negative) s."""
    return 2.0 * math.pi ** (s / 2.0) / gamma_fn(s / 2.0)


def frac_lap_constant(d: int, alpha: float) -> float:
    """Normalisation c_{d,alpha} of the singular-integral fractional Laplacian."""
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    return -((2 * math.pi) ** alpha) * sphere_area(-alpha) / sphere_area(d + alpha)


def lp_exponents(d: int, a: float, alpha: float) -> tuple[float, float]:
    """Return ``(p_{a,alpha}, p_a)`` = ``(d/(d+alpha-a), d/(d-a))``."""
    if d + alpha - a <= 0:
        raise DomainError(f"d + alpha - a must be positive (d={d}, alpha={alpha}, a={a})")
    if a >= d:
        raise DomainError(f"a must be smaller than d (a={a}, d={d})")
    return d / (d + alpha - a), d / (d - a)


def _check_sobolev(d, s):
    # s = 1 (the classical H^1 Sobolev constant) is accepted too
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if d <= 2 * s:
        raise DomainError(f"need d > 2s (d={d}, s={s})")


def sobolev_constant(d: int, s: float) -> float:
    """Sharp fractional Sobolev constant C_S with C_S ||f||^2_{2d/(d-2s)} <= |f|^2_{H^s}."""
    _check_sobolev(d, s)
    w = sphere_area
    return (2 * math.pi) ** (2 * s) * w(d - 2 * s) / w(d + 2 * s) * (w(2 * d) / w(d)) ** (2 * s / d)


def sobolev_constant_gamma_form(d: int, s: float) -> float:
    """Same constant as :func:`sobolev_constant`, written with Gamma ratios."""
    _check_sobolev(d, s)
    g = gamma_fn
    return (
        2 ** (2 * s) * math.pi ** s * g((d + 2 * s) / 2) / g((d - 2 * s) / 2)
        * (g(d / 2) / g(d)) ** (2 * s / d)
    )


def _check_hls(d, a):
    if not 0.0 < a < d:
        raise DomainError(f"a must lie in (0, d), got a={a}, d={d}")


def hls_constant_diagonal(d: int, a: float) -> float:
    """Sharp HLS constant at the self-conjugate exponent p = 2d/(2d-a)."""
    _check_hls(d, a)
    w = sphere_area
    return w(2 * d - a) / w(d - a) * (w(2 * d) / w(d)) ** ((a - d) / d)


def hls_constant_diagonal_gamma_form(d: int, a: float) -> float:
    _check_hls(d, a)
    g = gamma_fn
    return math.pi ** (a / 2) * g((d - a) / 2) / g(d - a / 2) * (g(d / 2) / g(d)) ** (-1 + a / d)


def gns_lower_bound(d: int, s: float) -> float:
    """Lower bound max(C_S(d, s/2), sqrt(C_S(d, s))) on the GNS constant."""
    return max(sobolev_constant(d, s / 2), math.sqrt(sobolev_constant(d, s)))


def critical_mass_fair(d: int, a: float) -> float:
    """Fair-competition threshold C_{a,d} on lambda * M0 (a = alpha)."""
    _check_hls(d, a)
    w = sphere_area
    branch = max(w(d - a) / w(d + a), w(d - a / 2) ** 2 / w(d + a / 2) ** 2)
    return 4 * (2 * math.pi) ** a / (d - a) * (w(2 * d) / w(d)) * w(d - a) / w(2 * d - a) * branch


def critical_mass_fair_gns_form(d: int, a: float) -> float:
    """C_{a,d} = 4 C_GNS^2 / ((d - a) C_HLS), with the GNS lower bound substituted."""
    return 4 * gns_lower_bound(d, a / 2) ** 2 / ((d - a) * hls_constant_diagonal(d, a))


def hls_r_exponent(d: int, a: float, p: float) -> float:
    """r with 1/r = (p/(p+1)) (1/p) + (1/(p+1)) (1/p_a)."""
    p_a = d / (d - a)
    inv_r = (p / (p + 1)) / p + (1 / (p + 1)) / p_a
    return 1.0 / inv_r


def critical_mass_fair_p(d: int, a: float, p: float) -> float:
    """p-dependent fair-competition threshold C_{a,d,p}.

    Non-sharp: the off-diagonal HLS constant C_HLS(d, a, r) has no known
    closed form, so the diagonal sharp constant is used in its place.
    """
    _check_hls(d, a)
    p_a = d / (d - a)
    if not 1.0 < p < p_a:
        raise DomainError(f"p must lie in (1, p_a={p_a}), got {p}")
    return 4 * sobolev_constant(d, a / 2) / (p * (d - a) * hls_constant_diagonal(d, a))


def b1_exponent(d: int, alpha: float, p: float) -> float:
    """b1 = alpha / (d (p - 1)), exponent of the dissipative term in the L^p ODE."""
    if p <= 1:
        raise DomainError(f"p must exceed 1, got {p}")
    return alpha / (d * (p - 1))


def blowup_exponents(d: int, a: float, alpha: float, p: float) -> tuple[float, float]:
    """Return ``(b, b1)`` with b = alpha / (p (alpha - a) + d (p - 1))."""
    b1 = b1_exponent(d, alpha, p)
    den = p * (alpha - a) + d * (p - 1)
    if den <= 0:
        raise DomainError(f"p(alpha - a) + d(p - 1) = {den} is not positive")
    return alpha / den, b1


def eta_threshold(d: int, a: float, alpha: float, p: float, mass: float, lam: float,
                  prefactor: float = 1.0) -> float:
    """Smallness threshold on ||rho0||_p for global existence when a > alpha.

    Scaling form ``C M0 (lambda M0)^{-d / ((a - alpha) q)}`` with q = p'; the
    constant C is not explicit and is taken from ``prefactor``.
    """
    if a <= alpha:
        raise DomainError("the L^p smallness condition only applies when a > alpha")
    q = p / (p - 1)
    return prefactor * mass * (lam * mass) ** (-d / ((a - alpha) * q))


@dataclass(frozen=True)
class ModelParams:
    d: int
    alpha: float
    a: float
    lam: float
    k: float = 0.5

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not 0.0 < self.a < self.d + 2:
            raise ValueError(f"a must lie in (0, d + 2), got {self.a}")
        if self.lam < 0:
            # lambda = 0 is accepted for pure-diffusion baselines
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.k < 0:
            raise ValueError(f"k must be nonnegative, got {self.k}")

    @property
    def regime(self) -> str:
        return regime_label(self.a, self.alpha)


def regime_label(a: float, alpha: float) -> str:
    if abs(a - alpha) <= FAIR_TOL:
        return "fair-competition"
    return "diffusion-dominated" if a < alpha else "aggregation-dominated"


@dataclass(frozen=True)
class BlowupConstants:
    """The non-explicit constants of the blow-up and smallness conditions."""

    c_star: float = 1.0
    c_star2: float = 1.0
    c_star3: float = 1.0
    eta_prefactor: float = 1.0


@dataclass
class RegimeVerdict:
    label: str
    regime: str
    details: dict = field(default_factory=dict)


VERDICTS = (
    "diffusion-dominated-global",
    "fair-small-mass-global",
    "fair-large-mass-unknown",
    "aggregation-small-data-global",
    "aggregation-local-only",
    "blowup-condition-met",
)


def classify_regime(params: ModelParams, rho0_summary: dict,
                    consts: BlowupConstants = BlowupConstants()) -> RegimeVerdict:
    """Classify the long-time behaviour predicted for an initial datum.

    ``rho0_summary`` carries ``mass``, ``lp_norm``, ``p`` and ``moment_k``
    (``int rho <x>^k``); ``abs_moment_k`` (``int rho |x|^k``) is used by the
    alpha < 1 blow-up condition when present.
    """
    d, alpha, a, lam, k = params.d, params.alpha, params.a, params.lam, params.k
    m0 = float(rho0_summary["mass"])
    regime = params.regime
    det = {"lambda_M0": lam * m0}

    if regime == "diffusion-dominated":
        return RegimeVerdict("diffusion-dominated-global", regime, det)

    if regime == "fair-competition":
        c_crit = critical_mass_fair(d, a)
        det["C_crit_fair"] = c_crit
        label = "fair-small-mass-global" if lam * m0 < c_crit else "fair-large-mass-unknown"
        return RegimeVerdict(label, regime, det)

    p = rho0_summary.get("p")
    lp = rho0_summary.get("lp_norm")
    if p is not None and lp is not None and lam > 0:
        thr = eta_threshold(d, a, alpha, p, m0, lam, consts.eta_prefactor)
        det["eta_threshold"] = thr
        if lp <= thr:
            return RegimeVerdict("aggregation-small-data-global", regime, det)

    if a >= 1 and 0 < k < alpha and lam > 0:
        mk = rho0_summary.get("moment_k")
        if alpha > 1 and mk is not None:
            bound = consts.c_star * lam ** (k / (2 * (a - k))) * m0 ** ((2 * a - k) / (2 * (a - k)))
            det["condBU_1_bound"] = bound
            if mk <= bound:
                return RegimeVerdict("blowup-condition-met", regime, det)
        elif alpha < 1:
            amk = rho0_summary.get("abs_moment_k", mk)
            if amk is not None and amk <= consts.c_star2 * m0 and lam * m0 >= consts.c_star3:
                return RegimeVerdict("blowup-condition-met", regime, det)
    return RegimeVerdict("aggregation-local-only", regime, det)


def _safe(fn, *args):
    try:
        return fn(*args)
    except DomainError:
        return None


@dataclass
class ConstantsReport:
    params: ModelParams
    omega: dict
    c_frac: float | None
    p_crit: float | None
    p_a: float | None
    C_S: float | None
    C_HLS: float | None
    C_GNS: float | None
    C_crit_fair: float | None
    C_crit_fair_p: float | None
    p: float | None
    b: float | None
    b1: float | None
    regime: str
    notes: list = field(default_factory=list)

    def to_text(self) -> str:
        def fmt(v):
            return "n/a" if v is None else f"{v:.12g}"

        prm = self.params
        lines = [
            f"d = {prm.d}",
            f"alpha = {fmt(prm.alpha)}",
            f"a = {fmt(prm.a)}",
            f"lambda = {fmt(prm.lam)}",
            f"k = {fmt(prm.k)}",
            f"regime = {self.regime}",
        ]
        lines += [f"omega_{fmt(s)} = {fmt(v)}" for s, v in sorted(self.omega.items())]
        lines += [
            f"c_frac = {fmt(self.c_frac)}",
            f"p_crit = {fmt(self.p_crit)}",
            f"p_a = {fmt(self.p_a)}",
            f"C_S = {fmt(self.C_S)}",
            f"C_HLS = {fmt(self.C_HLS)}",
            f"C_GNS_lower = {fmt(self.C_GNS)}",
            f"C_crit_fair = {fmt(self.C_crit_fair)}",
            f"p = {fmt(self.p)}",
            f"C_crit_fair_p = {fmt(self.C_crit_fair_p)}",
            f"b = {fmt(self.b)}",
            f"b1 = {fmt(self.b1)}",
        ]
        lines += [f"# {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def constants_report(params: ModelParams, p: float | None = None,
                     s_values=None) -> ConstantsReport:
    """Evaluate every constant that is defined for ``params``.

    Undefined entries (outside their validity domain) are reported as None.
    ``p`` defaults to the midpoint of the admissible L^p window.
    """
    d, alpha, a = params.d, params.alpha, params.a
    if s_values is None:
        s_values = sorted({float(d), float(d + alpha), float(-alpha), float(2 * d)})
    omega = {}
    for s in s_values:
        v = _safe(sphere_area, s)
        if v is not None:
            omega[s] = v

    exps = _safe(lp_exponents, d, a, alpha)
    p_crit, p_a = exps if exps else (None, None)
    if p is None and p_a is not None:
        lo = max(1.0, p_crit) if a > alpha else 1.0
        p = 0.5 * (lo + p_a)

    b = b1 = None
    if p is not None:
        be = _safe(blowup_exponents, d, a, alpha, p)
        if be:
            b, b1 = be
        else:
            b1 = _safe(b1_exponent, d, alpha, p)

    notes = []
    cfp = _safe(critical_mass_fair_p, d, a, p) if p is not None else None
    if cfp is not None:
        notes.append("C_crit_fair_p is non-sharp (diagonal HLS constant used as surrogate)")
    notes.append("C_GNS_lower is a lower bound; the sharp GNS constant is unknown")

    return ConstantsReport(
        params=params,
        omega=omega,
        c_frac=_safe(frac_lap_constant, d, alpha),
        p_crit=p_crit,
        p_a=p_a,
        C_S=_safe(sobolev_constant, d, alpha / 2),
        C_HLS=_safe(hls_constant_diagonal, d, a),
        C_GNS=_safe(gns_lower_bound, d, a / 2),
        C_crit_fair=_safe(critical_mass_fair, d, a),
        C_crit_fair_p=cfp,
        p=p,
        b=b,
        b1=b1,
        regime=params.regime,
        notes=notes,
    )
