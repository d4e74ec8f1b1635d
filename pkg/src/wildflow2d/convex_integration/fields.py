"""Array helpers shared by the iteration.

Real fields are handled through real-FFT ("half") coefficient arrays of shape
(..., n, n//2 + 1). Trace-free symmetric tensors are stored compactly as the
pair (r1, r2) meaning [[r1, r2], [r2, -r1]].
"""
from __future__ import annotations

import numpy as np

from ..operators import (
    anti_divergence_modes,
    fractional_symbol,
    gradient_modes,
    inverse_laplacian_symbol,
    leray_modes,
    tensor_divergence_modes,
)
from ..spectral_field import derivative_symbols, from_half_modes, layout, to_half_modes, wavenumber_norm


class InvariantError(RuntimeError):
    """An identity that must hold to machine precision failed."""


hm = to_half_modes
hv = from_half_modes


def drop_mean(modes: np.ndarray) -> np.ndarray:
    out = modes.copy()
    out[..., 0, 0] = 0.0
    return out


def grad(modes: np.ndarray) -> np.ndarray:
    return gradient_modes(modes)


def perp_grad(modes: np.ndarray) -> np.ndarray:
    s1, s2 = derivative_symbols(*layout(modes.shape))
    return np.stack([-s2 * modes, s1 * modes])


def div_vec(modes: np.ndarray) -> np.ndarray:
    s1, s2 = derivative_symbols(*layout(modes.shape))
    return s1 * modes[0] + s2 * modes[1]


def div_full(modes: np.ndarray) -> np.ndarray:
    return tensor_divergence_modes(modes)


def div_compact(modes: np.ndarray) -> np.ndarray:
    """Divergence of [[r1, r2], [r2, -r1]] given the modes of (r1, r2)."""
    s1, s2 = derivative_symbols(*layout(modes.shape))
    return np.stack([s1 * modes[0] + s2 * modes[1], s1 * modes[1] - s2 * modes[0]])


def frac_lap(modes: np.ndarray, m: float) -> np.ndarray:
    n, half = layout(modes.shape)
    return modes * fractional_symbol(n, m, False, half)


def inv_lap(modes: np.ndarray) -> np.ndarray:
    return modes * inverse_laplacian_symbol(*layout(modes.shape))


def leray(modes: np.ndarray) -> np.ndarray:
    return leray_modes(modes)


def compact(full: np.ndarray, tol: float = 1e-10, scale: float | None = None) -> tuple[np.ndarray, float]:
    """Compact form of a tensor that must be symmetric and trace-free; returns (r, defect).

    The defect is max(|T12 - T21|, |T11 + T22|) relative to ``scale`` (default max |T|).
    """
    scale = scale if scale is not None else float(np.abs(full).max())
    asym = float(np.abs(full[0, 1] - full[1, 0]).max())
    trace = float(np.abs(full[0, 0] + full[1, 1]).max())
    defect = max(asym, trace) / scale if scale > 0 else 0.0
    if defect > tol:
        raise InvariantError(f"tensor is not trace-free symmetric (defect {defect:.3g})")
    return np.stack([0.5 * (full[0, 0] - full[1, 1]), 0.5 * (full[0, 1] + full[1, 0])]), defect


def expand(r: np.ndarray) -> np.ndarray:
    return np.stack([np.stack([r[0], r[1]]), np.stack([r[1], -r[0]])])


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full pointwise a (x) b of two vector value arrays."""
    return a[:, None] * b[None, :]


def traceless(full: np.ndarray) -> np.ndarray:
    tr = 0.5 * (full[0, 0] + full[1, 1])
    out = full.copy()
    out[0, 0] -= tr
    out[1, 1] -= tr
    return out


def anti_div_compact(fmodes: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Compact modes of R f, checking symmetry and trace of the full output."""
    full = anti_divergence_modes(fmodes)
    return compact(full, tol)


def frobenius(r_values: np.ndarray) -> np.ndarray:
    """Pointwise Frobenius norm of compact (r1, r2) values."""
    return np.sqrt(2.0 * (r_values[0] ** 2 + r_values[1] ** 2))


def lp_compact(r_values: np.ndarray, p: float) -> float:
    n = r_values.shape[-1]
    f = frobenius(r_values)
    return float((np.sum(f**p) * (2 * np.pi) ** 2 / (n * n)) ** (1.0 / p))


def lp_vec(values: np.ndarray, p: float) -> float:
    n = values.shape[-1]
    f = np.sqrt((values**2).sum(axis=0))
    if np.isinf(p):
        return float(f.max())
    return float((np.sum(f**p) * (2 * np.pi) ** 2 / (n * n)) ** (1.0 / p))


def band_of(modes: np.ndarray, rtol: float = 1e-13) -> float:
    n, half = layout(modes.shape)
    c = np.abs(modes)
    if c.ndim > 2:
        c = c.reshape(-1, *c.shape[-2:]).max(axis=0)
    top = c.max()
    if top == 0:
        return 0.0
    return float(wavenumber_norm(n, half)[c > rtol * top].max())


def grid_for_band(band: float, factor: int = 4, minimum: int = 16) -> int:
    """Smallest power of two N with N > factor * band (products then stay unaliased)."""
    n = minimum
    while n <= factor * band:
        n *= 2
    return n


def sparse_to_half(ks: np.ndarray, coefs: np.ndarray, n: int) -> np.ndarray:
    """Scatter the coefficients of a real trigonometric sum into the real-FFT layout."""
    keep = ks[:, 1] >= 0
    out = np.zeros(coefs.shape[:-1] + (n, n // 2 + 1), dtype=complex)
    k = ks[keep]
    np.add.at(out, (..., k[:, 0] % n, k[:, 1]), coefs[..., keep])
    return out


__all__ = [
    "InvariantError", "hm", "hv", "drop_mean", "grad", "perp_grad", "div_vec", "div_full",
    "div_compact", "frac_lap", "inv_lap", "leray", "compact", "expand", "outer", "traceless",
    "anti_div_compact", "frobenius", "lp_compact", "lp_vec", "band_of", "grid_for_band",
    "sparse_to_half",
]
