"""Amplitude fields: a = rho^{1/2} gamma(R_l / rho), one per plus direction.

Minus directions reuse the plus amplitude. The amplitudes are evaluated on
a moderate grid, projected onto |k| <= K_a and stored as real-FFT modes, so
their products with the blocks remain exactly representable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..building_blocks import plus_directions
from ..geometry import gamma
from ..spectral_field import resample_half, wavenumber_norm
from .fields import InvariantError, frobenius, grad, grid_for_band, hm, hv
from .mollify import Mollified
from .params import ParamSet


def chi(z):
    """1 on [0, 1], identity on [2, inf), quintic Hermite bridge on (1, 2)."""
    z = np.asarray(z, dtype=float)
    s = np.clip(z - 1.0, 0.0, 1.0)
    bridge = 1.0 + 6 * s**3 - 8 * s**4 + 3 * s**5
    return np.where(z <= 1.0, 1.0, np.where(z >= 2.0, z, bridge))


def rho(r_norm, scale):
    """4 scale chi(|R| / scale) with scale = c_R delta_{q+1} M0(t)."""
    return 4.0 * scale * chi(np.asarray(r_norm) / scale)


def amplitude(R_values: np.ndarray, scale: float, c: float = 1.0) -> np.ndarray:
    """Plus-direction amplitudes (4, n, n) for a compact stress snapshot (2, n, n)."""
    r = rho(frobenius(R_values), scale)
    ratio = R_values / r
    worst = float(frobenius(ratio).max())
    if worst > 0.5 + 1e-12:
        raise InvariantError(f"|R_l / rho| = {worst:.4g} exceeds 1/2")
    root = np.sqrt(r)
    return np.stack([root * gamma((ratio[0], ratio[1]), z, c) for z in plus_directions()])


def amplitude_scale(params: ParamSet, q: int, t) -> np.ndarray:
    return params.c_R * params.delta(q + 1) * params.M0(t)


@dataclass(frozen=True)
class AmplitudePath:
    """Projected amplitudes on a small grid, with backward time differences.

    ``tilde`` has n_t + 1 time slots (slot 0 is t = -dt); ``d_tilde`` has n_t.
    ``bar``/``d_bar`` carry the Upsilon_l^{-1/2} factor in the multiplicative regime.
    """

    cutoff: float
    tilde: np.ndarray
    d_tilde: np.ndarray
    bar: np.ndarray
    d_bar: np.ndarray
    geometry_defect: float

    @property
    def n(self) -> int:
        return self.tilde.shape[-2]


def amplitude_path(mol: Mollified, params: ParamSet, q: int, times: np.ndarray, dt: float, cutoff: float = 32.0) -> AmplitudePath:
    n_a = max(grid_for_band(cutoff, factor=2), mol.n)
    keep = wavenumber_norm(n_a, True) <= cutoff
    t_ext = np.concatenate([[times[0] - dt], times])
    tilde = np.empty((len(t_ext), 4, n_a, n_a // 2 + 1), dtype=complex)
    worst = 0.0
    for j, t in enumerate(t_ext):
        Rv = hv(resample_half(mol.R_l[j], n_a))
        scale = float(amplitude_scale(params, q, t))
        a = amplitude(Rv, scale)
        worst = max(worst, reconstruction_defect(a, Rv))
        tilde[j] = hm(a) * keep
    if worst > 1e-10:
        raise InvariantError(f"geometric reconstruction off by {worst:.3g}")
    d_tilde = np.diff(tilde, axis=0) / dt
    if mol.upsilon_l is not None:
        fac = mol.upsilon_l ** -0.5
        bar = tilde * fac[:, None, None, None]
        d_bar = np.diff(bar, axis=0) / dt
    else:
        bar, d_bar = tilde, d_tilde
    return AmplitudePath(cutoff, tilde, d_tilde, bar, d_bar, worst)


def reconstruction_defect(a: np.ndarray, R_values: np.ndarray) -> float:
    """max |2 sum_+ a^2 z(x)z - R| / max(|R|, a^2): the eight-direction sum rebuilds R."""
    r1 = np.zeros_like(R_values[0])
    r2 = np.zeros_like(R_values[0])
    for a_z, z in zip(a, plus_directions()):
        v = z.vec
        r1 += 2 * a_z**2 * 0.5 * (v[0] ** 2 - v[1] ** 2)
        r2 += 2 * a_z**2 * v[0] * v[1]
    scale = max(float(np.abs(R_values).max()), float((a**2).max()))
    return float(max(np.abs(r1 - R_values[0]).max(), np.abs(r2 - R_values[1]).max())) / scale


@dataclass
class AmplitudeSnapshot:
    """Values of one amplitude family on the assembly grid at one time: (4, n, n) arrays."""

    val: np.ndarray
    grad: np.ndarray  # (4, 2, n, n)
    dval: np.ndarray
    grad_d: np.ndarray


def snapshot(modes: np.ndarray, d_modes: np.ndarray, n: int) -> AmplitudeSnapshot:
    m = resample_half(modes, n)
    dm = resample_half(d_modes, n)
    g = np.moveaxis(grad(m), 0, 1)
    gd = np.moveaxis(grad(dm), 0, 1)
    return AmplitudeSnapshot(hv(m), hv(g), hv(dm), hv(gd))
