"""Space-time mollification of a level and the first commutator stress.

Time mollification is causal and holds every path at its t = 0 value for
negative times, so a mollified quantity at t depends on the noise up to t
only. Arrays indexed by time carry one extra leading slot for t = -dt,
needed by the backward time differences of the amplitudes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..noise import spatial_mollify, time_mollify
from ..spectral_field import resample_half
from .fields import compact, div_full, grad, grid_for_band, hm, hv, outer, traceless
from .state import IterationState


@dataclass(frozen=True)
class Mollified:
    """Mollified level-q data on the grid ``n`` (half-layout modes).

    ``R_l`` and ``upsilon_l`` have n_t + 1 time slots, slot 0 being t = -dt;
    all other arrays have n_t slots.
    """

    n: int
    ell: float
    v_l: np.ndarray
    z_l: np.ndarray | None
    upsilon_l: np.ndarray | None
    R_l: np.ndarray
    pi_l: np.ndarray
    R_com1: np.ndarray
    closing: np.ndarray  # div of the full commutator tensor minus grad of the mollified pressure
    com1_defect: float


def _extend(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a[:1], a], axis=0)


def mollify(a: np.ndarray, ell: float, dt: float) -> np.ndarray:
    """Space then causal time mollification of half-layout modes along axis 0."""
    return time_mollify(spatial_mollify(a, ell), ell, dt)


def mollify_step(state: IterationState, ell: float | None = None) -> Mollified:
    q = state.q
    ell = state.params.ell(q) if ell is None else ell
    dt = state.grid.dt
    if not ell > dt:
        raise ValueError("mollifier width must exceed the time step")
    n_t = len(state.times)
    band = max(state.v_band(), state.noise_band(), 1.0)
    n = max(grid_for_band(band), state.n_v)
    v = resample_half(state.v, n)
    add = state.regime == "additive"
    if add:
        z = np.stack([state.z_modes(j, n) for j in range(n_t)])
        u = v + z
        z_l = mollify(z, ell, dt)
        u_l = mollify(v, ell, dt) + z_l
        ups = ups_l = None
    else:
        ups = state.upsilon()
        ups_l = time_mollify(_extend(ups), ell, dt)
        u = v
        u_l = mollify(v, ell, dt)
        z_l = None
    v_l = u_l - z_l if add else u_l
    weight = np.ones(n_t) if add else ups
    weight_l = np.ones(n_t) if add else ups_l[1:]
    # mollified products of the unmollified velocity
    uu = np.empty((n_t, 2, 2, n, n // 2 + 1), dtype=complex)
    for j in range(n_t):
        uv = hv(u[j])
        uu[j] = hm(weight[j] * outer(uv, uv))
    uu_l = mollify(uu, ell, dt)
    del uu
    pi_q = resample_half(state.pi, n)
    pi_ql = mollify(pi_q, ell, dt)
    R_q = resample_half(state.R, n)
    R_l = mollify(_extend(R_q), ell, dt)
    R_com1 = np.empty((n_t, 2, n, n // 2 + 1), dtype=complex)
    pi_l = np.empty((n_t, n, n // 2 + 1), dtype=complex)
    closing = np.empty((n_t, 2, n, n // 2 + 1), dtype=complex)
    worst = 0.0
    for j in range(n_t):
        ulv = hv(u_l[j])
        full = hm(weight_l[j] * outer(ulv, ulv)) - uu_l[j]
        full_v = hv(full)
        rc, defect = compact(traceless(full_v), scale=max(float(np.abs(full_v).max()), 1e-300))
        worst = max(worst, defect)
        R_com1[j] = hm(rc)
        pi_l[j] = pi_ql[j] - 0.5 * (full[0, 0] + full[1, 1])
        closing[j] = div_full(full) - grad(pi_ql[j])
    return Mollified(n, ell, v_l, z_l, ups_l, R_l, pi_l, R_com1, closing, worst)
