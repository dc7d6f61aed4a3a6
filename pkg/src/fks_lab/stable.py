"""Isotropic alpha-stable increments by Gaussian subordination.

With S a positive (alpha/2)-stable variable whose Laplace transform is
exp(-(scale s)^{alpha/2}) and G a standard Gaussian vector, sqrt(2 S) G has
characteristic function exp(-|xi|^alpha scale^{alpha/2}). The scale
dt^{2/alpha} therefore gives exp(-dt |xi|^alpha), the law generated by the
multiplier -|kappa|^alpha used in the spectral solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DomainError

_TINY = np.finfo(float).tiny


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator seeded through SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def split_streams(seed, n: int) -> list[np.random.Generator]:
    """n statistically independent generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(n)]


def sample_positive_stable(beta: float, scale: float, rng, size=None):
    """Totally skewed positive beta-stable draws, E exp(-s S) = exp(-(scale s)^beta).

    Kanter's form of the Chambers-Mallows-Stuck transform of a uniform angle
    and an exponential variable.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if scale <= 0:
        raise DomainError(f"scale must be positive, got {scale}")
    rng = make_rng(rng)
    u = rng.uniform(_TINY, math.pi, size)
    e = np.maximum(rng.standard_exponential(size), _TINY)
    a = np.sin(beta * u) / np.sin(u) ** (1.0 / beta)
    b = (np.sin((1.0 - beta) * u) / e) ** ((1.0 - beta) / beta)
    return scale * a * b


@dataclass(frozen=True)
class StableSpec:
    alpha: float
    dt: float
    d: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.dt < 0:
            raise DomainError(f"dt must be nonnegative, got {self.dt}")
        if self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")


def sample_increment(spec: StableSpec, rng, size: int | None = None) -> np.ndarray:
    """Increments with characteristic function exp(-dt |xi|^alpha).

    Returns shape (d,) when ``size`` is None, else (size, d).
    """
    rng = make_rng(rng)
    n = 1 if size is None else int(size)
    if spec.dt == 0:
        out = np.zeros((n, spec.d))
    elif spec.alpha == 2.0:
        out = math.sqrt(2.0 * spec.dt) * rng.standard_normal((n, spec.d))
    else:
        s = sample_positive_stable(spec.alpha / 2, spec.dt ** (2.0 / spec.alpha), rng, n)
        g = rng.standard_normal((n, spec.d))
        out = np.sqrt(2.0 * s)[:, None] * g
    return out[0] if size is None else out
