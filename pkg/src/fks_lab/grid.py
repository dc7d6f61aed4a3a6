"""Periodic grids, density fields, named initial-data presets and the
``FKS1`` flat binary format."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Periodic box [-L, L)^d sampled with N points per dimension."""

    d: int
    L: float
    N: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers kappa_n = pi n / L, broadcastable per axis."""
        k1 = 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)
        out = []
        for i in range(self.d):
            shp = [1] * self.d
            shp[i] = self.N
            out.append(k1.reshape(shp))
        return tuple(out)

    @cached_property
    def kappa_abs(self) -> np.ndarray:
        return np.sqrt(sum(k * k for k in self.wavenumbers))

    @cached_property
    def mode_index(self) -> np.ndarray:
        """max_i |n_i| for every Fourier mode, n_i the integer mode number."""
        n1 = np.abs(np.fft.fftfreq(self.N) * self.N)
        idx = np.zeros(self.shape)
        for i in range(self.d):
            shp = [1] * self.d
            shp[i] = self.N
            idx = np.maximum(idx, n1.reshape(shp))
        return idx


@dataclass
class GridField:
    values: np.ndarray
    domain: Domain

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.shape:
            raise ValueError(f"values of shape {self.values.shape} do not match {self.domain.shape}")

    def mass(self) -> float:
        return float(self.values.sum() * self.domain.cell_volume)

    def copy(self) -> "GridField":
        return GridField(self.values.copy(), self.domain)

    def mirrored(self) -> "GridField":
        """x -> -x on the grid. The node -L has no partner and maps to itself."""
        v = self.values
        for ax in range(self.domain.d):
            v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
        return GridField(v, self.domain)


def _center(center, d):
    if center is None:
        return np.zeros(d)
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size == 1:
        c = np.full(d, c.item())
    if c.size != d:
        raise ValueError(f"center must have {d} components")
    return c


def gaussian(domain: Domain, sigma: float = 1.0, center=None, mass: float = 1.0) -> GridField:
    c = _center(center, domain.d)
    r2 = sum((x - ci) ** 2 for x, ci in zip(domain.coords, c))
    v = np.exp(-r2 / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2) ** (domain.d / 2)
    return GridField(mass * v, domain)


def two_bumps(domain: Domain, sep: float = 2.0, sigma: float = 0.5, mass: float = 1.0) -> GridField:
    """Two Gaussians at +-sep/2 on the first axis, mass/2 each."""
    off = np.zeros(domain.d)
    off[0] = sep / 2
    g1 = gaussian(domain, sigma, off, mass / 2).values
    g2 = gaussian(domain, sigma, -off, mass / 2).values
    return GridField(g1 + g2, domain)


def ring(domain: Domain, radius: float = 2.0, sigma: float = 0.3, mass: float = 1.0) -> GridField:
    """Radial Gaussian profile around |x| = radius, normalised on the grid."""
    v = np.exp(-((domain.radius - radius) ** 2) / (2 * sigma ** 2))
    v *= mass / (v.sum() * domain.cell_volume)
    return GridField(v, domain)


PRESETS = {"gaussian": gaussian, "two-bumps": two_bumps, "ring": ring}


def make_preset(name: str, domain: Domain, **kwargs) -> GridField:
    try:
        fn = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return fn(domain, **kwargs)


def write_fks1(path, field: GridField) -> None:
    """Header line ``FKS1 d N L`` then row-major little-endian float64 data."""
    dom = field.domain
    with open(path, "wb") as fh:
        fh.write(f"FKS1 {dom.d} {dom.N} {dom.L!r}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_fks1(path) -> GridField:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ValueError(f"{path}: missing FKS1 header line")
    parts = raw[:nl].decode("ascii").split()
    if len(parts) != 4 or parts[0] != "FKS1":
        raise ValueError(f"{path}: bad header {raw[:nl]!r}")
    dom = Domain(int(parts[1]), float(parts[3]), int(parts[2]))
    data = np.frombuffer(raw[nl + 1:], dtype="<f8")
    if data.size != math.prod(dom.shape):
        raise ValueError(f"{path}: expected {math.prod(dom.shape)} values, found {data.size}")
    return GridField(data.reshape(dom.shape).copy(), dom)
