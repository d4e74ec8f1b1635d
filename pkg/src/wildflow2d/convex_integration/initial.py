"""Level-zero velocity, stress and pressure."""
from __future__ import annotations

import math

import numpy as np

from ..noise import NoisePath
from ..spectral_field import TimeGrid
from .fields import (
    InvariantError,
    anti_div_compact,
    compact,
    div_compact,
    div_full,
    frac_lap,
    grad,
    grid_for_band,
    hm,
    hv,
    outer,
    traceless,
)
from .params import ParamSet
from .state import IterationState


def velocity_amplitude(params: ParamSet, t):
    """Prefactor of (sin x2, 0) in v_0."""
    t = np.asarray(t, dtype=float)
    L = params.L
    if params.regime == "additive":
        return L**2 * np.exp(2 * L * t) / (2 * math.pi)
    return params.m_L * np.exp(2 * L * t + L) / (2 * math.pi)


def _shear_modes(n: int) -> np.ndarray:
    """Half-layout modes of (sin x2, 0)."""
    out = np.zeros((2, n, n // 2 + 1), dtype=complex)
    out[0, 0, 1] = -0.5j
    return out


def initial_pair(params: ParamSet, noise: NoisePath, grid: TimeGrid, n: int | None = None) -> IterationState:
    """Level-0 state; the shear v_0 grows like e^{2Lt} and the stress absorbs the rest."""
    regime = params.regime
    if noise.regime != regime:
        raise ValueError("noise regime does not match the parameters")
    if regime == "additive":
        k = noise.wavenumbers
        kz = float(np.hypot(k[:, 0], k[:, 1]).max())
    else:
        kz = 0.0
    n = n or grid_for_band(max(1.0, kz))
    shear = _shear_modes(n)
    amp = velocity_amplitude(params, grid.times)
    v = amp[:, None, None, None] * shear[None]
    n_t = len(grid.times)
    R = np.zeros((n_t, 2, n, n // 2 + 1), dtype=complex)
    pi = np.zeros((n_t, n, n // 2 + 1), dtype=complex)
    rate = 2 * params.L + (0.5 if regime == "multiplicative" else 0.0)
    for j in range(n_t):
        lin, _ = anti_div_compact(rate * v[j] + frac_lap(v[j], params.m))
        if regime == "additive":
            vv = hv(v[j])
            z = noise.field_values(j, n)
            full = outer(vv, z) + outer(z, vv) + outer(z, z)
            nl, _ = compact(traceless(full), scale=max(float(np.abs(full).max()), 1e-300))
            R[j] = lin + hm(nl)
            pi[j] = hm(-(np.sum(vv * z, axis=0) + 0.5 * np.sum(z * z, axis=0)))
        else:
            R[j] = lin
    return IterationState(0, regime, params, noise, grid, v, R, pi, [])


def level_zero_residual(state: IterationState, j: int) -> float:
    """Relative size of d_t v + [v/2] + (-Lap)^m v + div(...) + grad pi - div R at time index j."""
    if state.q != 0:
        raise ValueError("only defined at level 0")
    p = state.params
    n = state.n_v
    v = state.v[j]
    dv = 2 * p.L * v
    lhs = dv + frac_lap(v, p.m)
    vv = hv(v)
    if state.regime == "additive":
        u = vv + state.noise.field_values(j, n)
        lhs = lhs + div_full(hm(outer(u, u)))
    else:
        lhs = lhs + 0.5 * v + state.upsilon()[j] * div_full(hm(outer(vv, vv)))
    lhs = lhs + grad(state.pi[j])
    rhs = div_compact(state.R[j])
    scale = max(float(np.abs(rhs).max()), float(np.abs(dv).max()))
    return float(np.abs(lhs - rhs).max()) / scale


def check_level_zero(state: IterationState, tol: float = 1e-10) -> float:
    worst = max(level_zero_residual(state, j) for j in range(len(state.times)))
    if worst > tol:
        raise InvariantError(f"level-0 residual {worst:.3g} exceeds {tol:g}")
    return worst
