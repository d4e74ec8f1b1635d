"""Positive amplitudes that rebuild a small trace-free symmetric matrix from the eight directions.

With coordinates R = [[r1, r2], [r2, -r1]] the squared amplitude is affine,

    gamma_z(R)^2 = C + s1(z) * 25/28 * r1 + s2(z) * 25/96 * r2,

and sum_z gamma_z(R)^2 (z (x) z - Id/2) = R holds identically (checked by
brute force in the tests).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .building_blocks import Direction, direction_set

W1 = 25.0 / 28.0
W2 = 25.0 / 96.0
DIRECTION_COUNT = 8

# sign pattern (s1, s2) keyed by the plus representative
SIGNS = {(3, 4): (-1, 1), (3, -4): (-1, -1), (4, 3): (1, 1), (4, -3): (1, -1)}


class OutOfDomainError(ValueError):
    """Raised when a matrix leaves the region where all amplitudes stay positive."""


@dataclass(frozen=True)
class TraceFreeSym2:
    r1: float
    r2: float

    @classmethod
    def from_matrix(cls, m) -> "TraceFreeSym2":
        m = np.asarray(m, dtype=float)
        if abs(m[0, 1] - m[1, 0]) > 1e-12 or abs(m[0, 0] + m[1, 1]) > 1e-12:
            raise ValueError("matrix is not symmetric trace-free")
        return cls(0.5 * (m[0, 0] - m[1, 1]), m[0, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r1, self.r2], [self.r2, -self.r1]])

    @property
    def frobenius(self) -> float:
        return math.sqrt(2 * self.r1**2 + 2 * self.r2**2)


def traceless_outer(zeta) -> np.ndarray:
    """z (x) z - |z|^2 Id / 2 for a direction or a plain 2-vector."""
    v = zeta.vec if isinstance(zeta, Direction) else np.asarray(zeta, dtype=float)
    return np.outer(v, v) - 0.5 * (v @ v) * np.eye(2)


def signs(zeta: Direction) -> tuple[int, int]:
    z = zeta.positive
    return SIGNS[(z.p1, z.p2)]


def domain_radius(c: float = 1.0, floor: float = 0.1) -> float:
    """Largest Frobenius radius on which every squared amplitude stays >= floor * c."""
    # the worst direction lowers gamma^2 by |(W1, W2)| * sqrt(r1^2 + r2^2) = |(W1, W2)| * |R| / sqrt 2
    return (1.0 - floor) * c * math.sqrt(2.0) / math.hypot(W1, W2)


def gamma_squared(r1, r2, zeta: Direction, c: float = 1.0):
    s1, s2 = signs(zeta)
    return c + s1 * W1 * np.asarray(r1) + s2 * W2 * np.asarray(r2)


def _check_domain(r1, r2, c: float):
    frob = np.sqrt(2 * np.asarray(r1) ** 2 + 2 * np.asarray(r2) ** 2)
    worst = float(np.max(frob)) if np.size(frob) else 0.0
    if worst > domain_radius(c) * (1 + 1e-12):
        raise OutOfDomainError(f"|R| = {worst:.4g} exceeds the amplitude domain radius {domain_radius(c):.4g}")


def gamma(rmat, zeta: Direction, c: float = 1.0):
    """Amplitude for one direction; ``rmat`` is a TraceFreeSym2 or a pair of arrays (r1, r2)."""
    r1, r2 = (rmat.r1, rmat.r2) if isinstance(rmat, TraceFreeSym2) else rmat
    _check_domain(r1, r2, c)
    return np.sqrt(gamma_squared(r1, r2, zeta, c))


def gamma_gradient(rmat, zeta: Direction, c: float = 1.0) -> np.ndarray:
    """Derivative of gamma with respect to (r1, r2)."""
    r1, r2 = (rmat.r1, rmat.r2) if isinstance(rmat, TraceFreeSym2) else rmat
    g = gamma((r1, r2), zeta, c)
    s1, s2 = signs(zeta)
    return np.stack([s1 * W1 / (2 * g), s2 * W2 / (2 * g)])


def reconstruct(rmat, c: float = 1.0) -> np.ndarray:
    """sum_z gamma_z(R)^2 (z (x) z)^o; equals R inside the domain."""
    out = np.zeros((2, 2))
    for z in direction_set():
        out += gamma(rmat, z, c) ** 2 * traceless_outer(z)
    return out


def lambda_constant() -> float:
    return 2 * math.sqrt(12) * math.sqrt(4 * math.pi**2 + 1) * DIRECTION_COUNT


def amplitude_constants(samples: int = 200, c: float = 1.0) -> tuple[float, float]:
    """(M, C_Lambda); the sup norms of gamma and grad gamma over |R| <= 1/2 are taken on a polar grid."""
    rad = np.linspace(0.0, 0.5, samples)
    ang = np.linspace(0.0, 2 * np.pi, 4 * samples, endpoint=False)
    rr, aa = np.meshgrid(rad, ang, indexing="ij")
    # Frobenius radius |R| = sqrt 2 * hypot(r1, r2)
    r1 = rr * np.cos(aa) / math.sqrt(2)
    r2 = rr * np.sin(aa) / math.sqrt(2)
    best = 0.0
    for z in direction_set():
        g = gamma((r1, r2), z, c)
        dg = gamma_gradient((r1, r2), z, c)
        best = max(best, float(g.max()) + float(np.hypot(dg[0], dg[1]).max()))
    cl = lambda_constant()
    return cl * best, cl
