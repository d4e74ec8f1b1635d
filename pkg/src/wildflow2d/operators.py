"""Fourier multipliers on the torus and the symmetric trace-free anti-divergence.

Each operator has a modes-level form (``*_modes``) working on raw coefficient
arrays, used by the iteration, and a TorusField wrapper.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral_field import (
    TorusField,
    derivative_symbols,
    layout,
    wavenumber_norm,
    wavenumbers,
)


@dataclass(frozen=True)
class BandSpec:
    """Frequency band: ``low`` keeps |k| <= threshold, ``high`` keeps |k| >= threshold, ``nonzero`` drops k = 0."""

    kind: str
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in ("low", "high", "nonzero"):
            raise ValueError(f"unknown band kind {self.kind!r}")
        if self.kind == "nonzero":
            if self.threshold is not None:
                raise ValueError("nonzero band takes no threshold")
        elif self.threshold is None or self.threshold < 0:
            raise ValueError("band threshold must be non-negative")

    def mask(self, n: int) -> np.ndarray:
        kn = wavenumber_norm(n)
        if self.kind == "low":
            return kn <= self.threshold
        if self.kind == "high":
            return kn >= self.threshold
        return kn > 0


@lru_cache(maxsize=32)
def fractional_symbol(n: int, m: float, inverse: bool = False, half: bool = False) -> np.ndarray:
    kn = wavenumber_norm(n, half)
    with np.errstate(divide="ignore"):
        sym = kn ** (-2 * m if inverse else 2 * m)
    sym[0, 0] = 0.0
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=16)
def inverse_laplacian_symbol(n: int, half: bool = False) -> np.ndarray:
    """Symbol of Delta^{-1} on mean-zero fields: -1/|k|^2, zero at k = 0."""
    k1, k2 = wavenumbers(n, half)
    k2sum = k1**2 + k2**2
    k2sum[0, 0] = 1.0
    sym = -1.0 / k2sum
    sym[0, 0] = 0.0
    sym.setflags(write=False)
    return sym


def is_mean_zero(modes: np.ndarray, tol: float = 1e-12) -> bool:
    c = np.abs(modes)
    return bool(np.all(c[..., 0, 0] <= tol * max(c.max(), 1e-300)))


def divergence_modes(vhat: np.ndarray) -> np.ndarray:
    s1, s2 = derivative_symbols(*layout(vhat.shape))
    return s1 * vhat[0] + s2 * vhat[1]


def gradient_modes(phat: np.ndarray) -> np.ndarray:
    s1, s2 = derivative_symbols(*layout(phat.shape))
    return np.stack([s1 * phat, s2 * phat])


def perp_gradient_modes(phat: np.ndarray) -> np.ndarray:
    """nabla^perp = (-d2, d1)."""
    s1, s2 = derivative_symbols(*layout(phat.shape))
    return np.stack([-s2 * phat, s1 * phat])


def tensor_divergence_modes(that: np.ndarray) -> np.ndarray:
    """(div T)_j = d_i T_ij."""
    s1, s2 = derivative_symbols(*layout(that.shape))
    return s1 * that[0] + s2 * that[1]


def pressure_part_modes(vhat: np.ndarray) -> np.ndarray:
    return inverse_laplacian_symbol(*layout(vhat.shape)) * divergence_modes(vhat)


def leray_modes(vhat: np.ndarray) -> np.ndarray:
    return vhat - gradient_modes(pressure_part_modes(vhat))


def anti_divergence_modes(fhat: np.ndarray) -> np.ndarray:
    """R f = grad g + (grad g)^T - (div g) Id with Delta g = f minus its mean."""
    lay = layout(fhat.shape)
    s1, s2 = derivative_symbols(*lay)
    g = inverse_laplacian_symbol(*lay) * fhat
    d1g1, d2g1 = s1 * g[0], s2 * g[0]
    d1g2, d2g2 = s1 * g[1], s2 * g[1]
    off = d2g1 + d1g2
    diag = d1g1 - d2g2
    return np.stack([np.stack([diag, off]), np.stack([off, -diag])])


def fractional_laplacian(field: TorusField, m: float, sign: str = "forward") -> TorusField:
    if not 0 < m <= 2:
        raise ValueError("m must lie in (0, 2]")
    if sign not in ("forward", "inverse"):
        raise ValueError(f"unknown sign {sign!r}")
    inverse = sign == "inverse"
    if inverse and not is_mean_zero(field.modes):
        raise ValueError("inverse fractional Laplacian needs a mean-zero field")
    return TorusField.from_modes(field.modes * fractional_symbol(field.n, m, inverse), mean_zero=True)


def inverse_sqrt_laplacian(field: TorusField) -> TorusField:
    """(-Delta)^{-1/2} with the zero mode sent to 0."""
    return TorusField.from_modes(field.modes * fractional_symbol(field.n, 0.5, True), mean_zero=True)


def _require_vector(field: TorusField):
    if field.components != (2,):
        raise ValueError("expected a 2-component vector field")


def leray_project(field: TorusField) -> TorusField:
    _require_vector(field)
    return TorusField.from_modes(leray_modes(field.modes))


def band_project(field: TorusField, band: BandSpec) -> TorusField:
    return TorusField.from_modes(field.modes * band.mask(field.n), mean_zero=band.kind != "low")


def anti_divergence(field: TorusField) -> TorusField:
    _require_vector(field)
    return TorusField.from_modes(anti_divergence_modes(field.modes), mean_zero=True)


def pressure_part(field: TorusField) -> TorusField:
    """Delta^{-1} div of a vector field; its gradient is the non-solenoidal part."""
    _require_vector(field)
    return TorusField.from_modes(pressure_part_modes(field.modes), mean_zero=True)


def divergence(field: TorusField) -> TorusField:
    if field.components == (2,):
        return TorusField.from_modes(divergence_modes(field.modes), mean_zero=True)
    if field.components == (2, 2):
        return TorusField.from_modes(tensor_divergence_modes(field.modes), mean_zero=True)
    raise ValueError("divergence needs a vector or tensor field")


def gradient(field: TorusField) -> TorusField:
    return TorusField.from_modes(gradient_modes(field.modes), mean_zero=True)


def perp_gradient(field: TorusField) -> TorusField:
    return TorusField.from_modes(perp_gradient_modes(field.modes), mean_zero=True)
