"""Intermittent stationary flows on the torus.

Every block is a finite trigonometric sum, so it is represented exactly as a
sparse list of integer wavenumbers with coefficients (``SparseModes``) and
only scattered onto an FFT grid on request. Support statements are then
exact lattice statements rather than floating-point observations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .spectral_field import TorusField, check_grid

PLUS_NUMERATORS = ((3, 4), (3, -4), (4, 3), (4, -3))


@dataclass(frozen=True)
class Direction:
    """Unit vector p/5 with p an integer Pythagorean pair."""

    p1: int
    p2: int

    def __post_init__(self):
        if self.p1**2 + self.p2**2 != 25:
            raise ValueError("direction numerators must satisfy p1^2 + p2^2 = 25")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.p1, self.p2], dtype=float) / 5.0

    @property
    def perp(self) -> np.ndarray:
        return np.array([-self.p2, self.p1], dtype=float) / 5.0

    @property
    def exact(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.p1, 5), Fraction(self.p2, 5)

    @property
    def sign_class(self) -> str:
        return "+" if (self.p1, self.p2) in PLUS_NUMERATORS else "-"

    @property
    def positive(self) -> "Direction":
        """The representative in the plus class (itself or its negative)."""
        return self if self.sign_class == "+" else -self

    def __neg__(self) -> "Direction":
        return Direction(-self.p1, -self.p2)

    def __str__(self):
        return f"({self.p1},{self.p2})/5"


def direction_set() -> list[Direction]:
    """The eight directions: the four plus directions, then their negatives."""
    plus = [Direction(*p) for p in PLUS_NUMERATORS]
    return plus + [-d for d in plus]


def plus_directions() -> list[Direction]:
    return direction_set()[:4]


def min_pair_sum() -> float:
    """min |z + z'| over non-antipodal pairs (z = z' allowed)."""
    dirs = direction_set()
    return min(
        float(np.hypot(*(d.vec + e.vec))) for d in dirs for e in dirs if (d.p1 + e.p1, d.p2 + e.p2) != (0, 0)
    )


def _is_multiple(x: float, base: int) -> bool:
    return abs(x - round(x)) < 1e-9 and round(x) > 0 and round(x) % base == 0


@dataclass(frozen=True)
class BlockSpec:
    """Direction, frequency, spacing, kernel size and temporal rate of one block.

    ``gap`` is the minimal ratio demanded between consecutive members of
    r <= mu <= 1/sigma <= lam; desk-scale parameters only manage ratios of
    order one, hence the default of 1.
    """

    zeta: Direction
    lam: float
    sigma: float
    r: int
    mu: float
    gap: float = 1.0

    def __post_init__(self):
        if not _is_multiple(self.lam, 10):
            raise ValueError(f"lambda must be a positive multiple of 10, got {self.lam}")
        if not _is_multiple(self.lam * self.sigma, 10):
            raise ValueError(f"lambda*sigma must be a positive multiple of 10, got {self.lam * self.sigma}")
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("r must be a positive integer")
        chain = [1.0, self.r, self.mu, 1.0 / self.sigma, self.lam]
        for lo, hi in zip(chain[1:-1], chain[2:]):
            if hi < self.gap * lo * (1 - 1e-12):
                raise ValueError(f"block ordering violated: {hi} < {self.gap} * {lo}")

    @property
    def lam_int(self) -> int:
        return int(round(self.lam))

    @property
    def lam_sigma(self) -> int:
        return int(round(self.lam * self.sigma))

    def with_direction(self, zeta: Direction) -> "BlockSpec":
        return BlockSpec(zeta, self.lam, self.sigma, self.r, self.mu, self.gap)

    @property
    def carrier(self) -> np.ndarray:
        """Integer wavenumber lam * zeta."""
        return np.array([self.zeta.p1, self.zeta.p2]) * (self.lam_int // 5)

    @property
    def pulse_radius(self) -> float:
        return self.lam_sigma * self.r * math.sqrt(2)


@dataclass(frozen=True)
class SparseModes:
    """Coefficients ``coefs[..., j]`` at integer wavenumbers ``ks[j]``; leading axes are components."""

    ks: np.ndarray
    coefs: np.ndarray

    @property
    def max_wavenumber(self) -> int:
        return int(np.abs(self.ks).max()) if len(self.ks) else 0

    def to_grid(self, n: int) -> np.ndarray:
        check_grid(n)
        if self.max_wavenumber >= n // 2:
            raise ValueError(f"grid {n} too small for wavenumber {self.max_wavenumber}")
        out = np.zeros(self.coefs.shape[:-1] + (n, n), dtype=complex)
        np.add.at(out, (..., self.ks[:, 0] % n, self.ks[:, 1] % n), self.coefs)
        return out

    def field(self, n: int) -> TorusField:
        return TorusField.from_modes(self.to_grid(n))

    def support(self, tol: float = 0.0) -> np.ndarray:
        mag = np.abs(self.coefs).reshape(-1, len(self.ks)).max(axis=0)
        return self.ks[mag > tol]


def product_support(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sumset {k + k'}: every wavenumber a product of the two sums can occupy."""
    s = (a[:, None, :] + b[None, :, :]).reshape(-1, 2)
    return np.unique(s, axis=0)


def default_grid(max_k: int, factor: int = 4) -> int:
    """Smallest power of two N with N/2 > factor/2 * max_k (room for products)."""
    need = factor * max_k + 2
    n = 8
    while n < need:
        n *= 2
    return n


def stationary_modes(spec: BlockSpec) -> tuple[SparseModes, SparseModes]:
    k = spec.carrier[None, :]
    b = SparseModes(k, (1j * spec.zeta.perp)[:, None].astype(complex))
    psi = SparseModes(k, np.array([1.0 / spec.lam], dtype=complex))
    return b, psi


def stationary_flow(spec: BlockSpec, n: int | None = None) -> tuple[TorusField, TorusField]:
    """b = i zeta^perp e^{i lam zeta.x} and psi = e^{i lam zeta.x} / lam, with b = grad^perp psi."""
    if abs(spec.lam * spec.zeta.p1 / 5 - round(spec.lam * spec.zeta.p1 / 5)) > 1e-12:
        raise ValueError("lam * zeta is not an integer vector")
    b, psi = stationary_modes(spec)
    n = n or default_grid(int(np.abs(spec.carrier).max()))
    return b.field(n), psi.field(n)


@lru_cache(maxsize=32)
def _square(r: int) -> np.ndarray:
    j = np.arange(-r, r + 1)
    j1, j2 = np.meshgrid(j, j, indexing="ij")
    return np.stack([j1.ravel(), j2.ravel()], axis=1)


def dirichlet_modes(r: int) -> SparseModes:
    if r < 1:
        raise ValueError("r must be >= 1")
    sq = _square(r)
    return SparseModes(sq, np.full(len(sq), 1.0 / (2 * r + 1), dtype=complex))


def dirichlet_kernel(r: int, n: int | None = None) -> TorusField:
    """(2r+1)^{-1} times the sum of e^{ik.x} over the integer square [-r, r]^2."""
    modes = dirichlet_modes(r)
    return modes.field(n or default_grid(r, 2))


def _pulse_lattice(spec: BlockSpec) -> tuple[np.ndarray, np.ndarray]:
    """Integer wavenumbers of the pulse and the first-slot index j1 of each."""
    z = spec.zeta.positive
    sq = _square(spec.r)
    step = spec.lam_sigma // 5
    p = np.array([z.p1, z.p2])
    pp = np.array([-z.p2, z.p1])
    ks = step * (sq[:, :1] * p + sq[:, 1:] * pp)
    return ks, sq[:, 0]


def pulse_modes(spec: BlockSpec, t: float, dt_order: int = 0) -> SparseModes:
    """Modes of the pulse (or of its dt_order-th time derivative) at time t.

    The first argument of the kernel carries mu t, so each lattice point picks
    up the phase exp(i j1 lam sigma mu t).
    """
    ks, j1 = _pulse_lattice(spec)
    omega = j1 * spec.lam_sigma * spec.mu
    coefs = np.exp(1j * omega * t) / (2 * spec.r + 1)
    if dt_order:
        coefs = coefs * (1j * omega) ** dt_order
    return SparseModes(ks, coefs)


def pulse(spec: BlockSpec, t: float, n: int | None = None) -> TorusField:
    m = pulse_modes(spec, t)
    return TorusField.from_values(m.field(n or default_grid(m.max_wavenumber)).values.real)


def intermittent_modes(spec: BlockSpec, t: float, dt_order: int = 0) -> SparseModes:
    eta = pulse_modes(spec, t, dt_order)
    ks = eta.ks + spec.carrier
    coefs = (1j * spec.zeta.perp)[:, None] * eta.coefs[None, :]
    return SparseModes(ks, coefs)


def intermittent_flow(spec: BlockSpec, t: float, n: int | None = None) -> TorusField:
    """W = pulse * b, kept complex."""
    m = intermittent_modes(spec, t)
    return m.field(n or default_grid(m.max_wavenumber))


def band_contains(ks: np.ndarray, lo: float = 0.0, hi: float = math.inf, drop_zero: bool = False) -> bool:
    """All wavenumbers in ks lie in lo <= |k| <= hi (ignoring k = 0 when drop_zero)."""
    mag = np.hypot(ks[:, 0], ks[:, 1])
    if drop_zero:
        mag = mag[mag > 0]
    return bool(np.all((mag >= lo) & (mag <= hi)))


def support_report(spec: BlockSpec, other: Direction) -> dict[str, bool]:
    """Exact lattice check of the four frequency-localisation statements for (zeta, other)."""
    lam, ls = spec.lam, spec.lam_sigma
    w1 = intermittent_modes(spec, 0.0).ks
    w2 = intermittent_modes(spec.with_direction(other), 0.0).ks
    prod = product_support(w1, w2)
    eta = pulse_modes(spec, 0.0).ks
    antipodal = spec.zeta == -other
    return {
        "block_band": band_contains(w1, lam / 2, 2 * lam),
        "pair_band": antipodal or band_contains(prod, lam / 5, 4 * lam),
        "pair_gap": band_contains(prod, ls / 2, drop_zero=True),
        "pulse_gap": band_contains(eta, ls / 2, drop_zero=True),
    }


def block_specs(lam: float, sigma: float, r: int, mu: float, gap: float = 1.0) -> dict[Direction, BlockSpec]:
    return {d: BlockSpec(d, lam, sigma, r, mu, gap) for d in direction_set()}
