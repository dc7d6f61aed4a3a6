"""Line-based ``section.key = value`` experiment configuration.

Every problem in a file is collected (with its line number) before anything
is reported, so one pass fixes a broken config. ``dump_config`` writes the
effective configuration in the same format; it parses back to an equal value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

MODES = ("constants", "solve", "particles", "compare", "blowup-scan")
PRESET_NAMES = ("gaussian", "two-bumps", "ring")


class ConfigError(ValueError):
    """All problems found in one config text."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


# kind tags understood by the parser
FLOAT, INT, BOOL, STR, OPT_FLOAT, FLOATS = "float", "int", "bool", "str", "float|none", "floats"


def _f(default, kind=FLOAT, check=None, required=False):
    return field(default=default, metadata={"kind": kind, "check": check, "required": required})


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonneg(v):
    return None if v >= 0 else "must be nonnegative"


def _opt_positive(v):
    return None if v is None or v > 0 else "must be positive or none"


def _pow2(v):
    return None if v >= 16 and not v & (v - 1) else "must be a power of two >= 16"


def _alpha(v):
    return None if 0 < v <= 2 else "must lie in (0, 2]"


def _unit(v):
    return None if 0 < v <= 1 else "must lie in (0, 1]"


def _one_of(options):
    def check(v):
        return None if v in options else f"must be one of {', '.join(options)}"
    return check


def _nonneg_list(v):
    return None if v and all(x >= 0 for x in v) else "must be a nonempty list of nonnegative numbers"


@dataclass
class ModelSection:
    d: int = _f(None, INT, lambda v: None if v >= 1 else "must be >= 1", required=True)
    alpha: float = _f(None, FLOAT, _alpha, required=True)
    a: float = _f(None, FLOAT, _positive, required=True)
    # "lambda" is a keyword, so the attribute is lam
    lam: float = _f(None, FLOAT, _nonneg, required=True)
    k: float = _f(0.5, FLOAT, _nonneg)
    mass: float = _f(1.0, FLOAT, _positive)


@dataclass
class GridSection:
    L: float = _f(8.0, FLOAT, _positive)
    N: int = _f(128, INT, _pow2)


@dataclass
class SolverSection:
    dt: float = _f(1e-3, FLOAT, _positive)
    T: float = _f(1.0, FLOAT, _positive)
    cfl: float = _f(0.5, FLOAT, _unit)
    dealias: bool = _f(True, BOOL)
    eps_kernel: float | None = _f(None, OPT_FLOAT, _opt_positive)
    blowup_linf_factor: float = _f(1e3, FLOAT, _positive)
    blowup_tail_fraction: float = _f(0.1, FLOAT, _unit)
    diag_stride: int = _f(10, INT, _positive)
    detect_blowup: bool = _f(True, BOOL)
    min_dt_fraction: float = _f(1e-3, FLOAT, _unit)
    negativity_abort: float = _f(1e-3, FLOAT, _positive)
    resolution_loss_growth: float = _f(4.0, FLOAT, _positive)


@dataclass
class ParticlesSection:
    N: int = _f(1000, INT, lambda v: None if v >= 2 else "must be >= 2")
    dt: float = _f(1e-2, FLOAT, _positive)
    T: float = _f(1.0, FLOAT, _positive)
    eps: float | None = _f(None, OPT_FLOAT, _opt_positive)
    antithetic: bool = _f(False, BOOL)
    diag_stride: int = _f(10, INT, _positive)
    snapshot_stride: int = _f(0, INT, _nonneg)


@dataclass
class DiagnosticsSection:
    p_list: tuple = _f((2.0,), FLOATS, lambda v: None if v and all(x >= 1 for x in v) else "entries must be >= 1")
    k_list: tuple = _f((0.5,), FLOATS, _nonneg_list)
    blowup_k: float | None = _f(None, OPT_FLOAT, _opt_positive)
    blowup_r: float = _f(0.25, FLOAT, lambda v: None if 0 < v < 0.5 else "must lie in (0, 1/2)")


@dataclass
class InitialSection:
    preset: str = _f("gaussian", STR, _one_of(PRESET_NAMES))
    sigma: float = _f(1.0, FLOAT, _positive)
    sep: float = _f(2.0, FLOAT, _positive)
    radius: float = _f(2.0, FLOAT, _positive)
    file: str = _f("", STR)


@dataclass
class ScanSection:
    lam_mass: tuple = _f((0.5, 1.0, 2.0, 4.0, 8.0), FLOATS, _nonneg_list)


@dataclass
class OutputSection:
    dir: str = _f("out", STR)
    seed: int = _f(0, INT, lambda v: None if 0 <= v < 2 ** 64 else "must be an unsigned 64-bit integer")


@dataclass
class ExperimentConfig:
    mode: str = _f(None, STR, _one_of(MODES), required=True)
    model: ModelSection = field(default_factory=ModelSection)
    grid: GridSection = field(default_factory=GridSection)
    solver: SolverSection = field(default_factory=SolverSection)
    particles: ParticlesSection = field(default_factory=ParticlesSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    initial: InitialSection = field(default_factory=InitialSection)
    scan: ScanSection = field(default_factory=ScanSection)
    output: OutputSection = field(default_factory=OutputSection)


_ALIASES = {("model", "lambda"): "lam"}
_SECTIONS = {f.name: f.default_factory for f in fields(ExperimentConfig) if f.name != "mode"}


def _external_name(section, attr):
    for (sec, ext), internal in _ALIASES.items():
        if sec == section and internal == attr:
            return ext
    return attr


def _schema():
    """Map dotted key -> (section or None, attribute, metadata)."""
    out = {}
    top = {f.name: f for f in fields(ExperimentConfig)}
    out["mode"] = (None, "mode", top["mode"].metadata)
    for sec, factory in _SECTIONS.items():
        for f in fields(factory()):
            out[f"{sec}.{_external_name(sec, f.name)}"] = (sec, f.name, f.metadata)
    return out


SCHEMA = _schema()
REQUIRED_KEYS = tuple(k for k, (_, _, md) in SCHEMA.items() if md["required"])


def _convert(kind: str, raw: str):
    s = raw.strip()
    if kind == FLOAT:
        v = float(s)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if kind == INT:
        return int(s, 10)
    if kind == BOOL:
        low = s.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError("expected a boolean (true/false)")
    if kind == STR:
        if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
            s = s[1:-1]
        return s
    if kind == OPT_FLOAT:
        return None if s.lower() in ("none", "") else _convert(FLOAT, s)
    if kind == FLOATS:
        parts = [p for p in s.replace(",", " ").split()]
        vals = tuple(float(p) for p in parts)
        if any(math.isnan(v) for v in vals):
            raise ValueError("nan is not allowed")
        return vals
    raise AssertionError(kind)


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate; raise ConfigError listing every problem.

    ``overrides`` maps dotted keys to raw string values applied after the
    text (command-line flags use this).
    """
    errors: list[str] = []
    values: dict[str, tuple] = {}  # key -> (value, line label)
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {lineno}: expected 'key = value', got {body!r}")
            continue
        key, raw = (p.strip() for p in body.split("=", 1))
        seen.add(key)
        _assign(key, raw, f"line {lineno}", values, errors)
    for key, raw in (overrides or {}).items():
        seen.add(key)
        _assign(key, str(raw), "command line", values, errors)

    for key in REQUIRED_KEYS:
        if key not in seen:
            errors.append(f"missing required key {key}")

    cfg = ExperimentConfig()
    for key, (val, _) in values.items():
        sec, attr, _ = SCHEMA[key]
        if sec is None:
            setattr(cfg, attr, val)
        else:
            setattr(getattr(cfg, sec), attr, val)
    if not errors:
        errors.extend(_cross_checks(cfg, values))
    if errors:
        raise ConfigError(errors)
    return cfg


def _assign(key, raw, where, values, errors):
    if key not in SCHEMA:
        errors.append(f"{where}: unknown key {key!r}")
        return
    if key in values and values[key][1] != "command line" and where != "command line":
        errors.append(f"{where}: duplicate key {key!r} (first set on {values[key][1]})")
        return
    md = SCHEMA[key][2]
    try:
        val = _convert(md["kind"], raw)
    except ValueError as exc:
        errors.append(f"{where}: {key}: type mismatch, expected {md['kind']} ({exc})")
        return
    check = md["check"]
    msg = check(val) if check is not None else None
    if msg:
        errors.append(f"{where}: {key} = {raw}: constraint violation, {msg}")
        return
    values[key] = (val, where)


def _cross_checks(cfg: ExperimentConfig, values) -> list[str]:
    errs = []

    def where(key):
        return values[key][1] if key in values else "default"

    m = cfg.model
    if not m.a < m.d + 2:
        errs.append(f"{where('model.a')}: model.a = {m.a!r}: constraint violation, must be < d + 2")
    if cfg.mode != "constants" and m.d > 3:
        errs.append(f"{where('model.d')}: model.d = {m.d}: constraint violation, runs support d <= 3")
    if cfg.mode in ("particles", "compare") and cfg.particles.antithetic and cfg.particles.N % 2:
        errs.append(f"{where('particles.N')}: particles.N must be even with antithetic pairing")
    if cfg.initial.preset == "ring" and m.d == 1 and not cfg.initial.file:
        errs.append(f"{where('initial.preset')}: the ring preset needs d >= 2")
    return errs


def _format(kind, v) -> str:
    if v is None:
        return "none"
    if kind == BOOL:
        return "true" if v else "false"
    if kind == FLOATS:
        return ", ".join(repr(float(x)) for x in v)
    if kind == FLOAT:
        return repr(float(v))
    return str(v)


def dump_config(cfg: ExperimentConfig) -> str:
    """Every key with its effective value, in parseable form."""
    lines = []
    for key, (sec, attr, md) in SCHEMA.items():
        obj = cfg if sec is None else getattr(cfg, sec)
        lines.append(f"{key} = {_format(md['kind'], getattr(obj, attr))}")
    return "\n".join(lines) + "\n"

