"""One step of the iteration: mollify, build amplitudes and blocks, assemble.

The step streams over time: each snapshot is assembled on the fine grid,
checked and reduced to norms, and only the new velocity (plus, on request,
the new stress and pressure) is kept.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, replace

import numpy as np

from ..spectral_field import GridError, resample_half
from .amplitude import amplitude_path, snapshot
from .fields import InvariantError, grad, grid_for_band, hm, hv, lp_compact, lp_vec
from .mollify import mollify_step
from .perturbation import (
    BlockBank,
    divergence_defect,
    perturbation,
    time_derivative_pc,
    time_derivative_potential,
    time_derivative_t,
)
from .reynolds import Snapshot, assemble, oscillation
from .fields import anti_div_compact, drop_mean
from .state import IterationState

PIECES = ("R_lin", "R_cor", "R_osc", "R_osc_force", "R_geo", "R_com2", "R_com1")


@dataclass(frozen=True)
class StepOptions:
    grid: int | None = None
    amplitude_cutoff: float = 32.0
    keep_stress: bool = True
    residual_tol: float = 1e-8
    exact_tol: float = 1e-10
    ell: float | None = None


def assembly_band(lam: float, lam_sigma: float, r: int, cutoff: float, low_band: float) -> float:
    """Largest |k| of any single factor entering a product on the fine grid."""
    return max(lam + lam_sigma * r * math.sqrt(2) + cutoff, 2 * cutoff + 2 * lam_sigma * r * math.sqrt(2), low_band)


def _bounds(state: IterationState, q1: int, t: np.ndarray) -> dict:
    p = state.params
    M0 = p.M0(t)
    mL = p.m_L if state.regime == "multiplicative" else 1.0
    growth = 1 + sum(p.delta(i) ** 0.5 for i in range(1, q1 + 1))
    return {
        "v_L2": mL * M0**0.5 * growth,
        "v_C1": mL * M0**0.5 * p.lam(q1) ** 4,
        "R_L1": M0 * p.c_R * p.delta(q1 + 1),
        "dv_L2": mL * M0**0.5 * p.delta(q1) ** 0.5,
    }


def iterate_step(state: IterationState, options: StepOptions | None = None, log=None) -> IterationState:
    opt = options or StepOptions()
    p = state.params
    q = state.q
    grid = state.grid
    times = grid.times
    dt = grid.dt
    n_t = len(times)
    started = _time.perf_counter()
    blocks = p.blocks(q + 1)
    bank_spec = int(round(blocks.lam * blocks.sigma))
    low = max(state.v_band(), state.noise_band())
    band = assembly_band(blocks.lam, bank_spec, blocks.r, opt.amplitude_cutoff, low)
    n = opt.grid or grid_for_band(band)
    if 4 * band >= n:
        raise GridError(f"grid {n} aliases products of band {band:.1f}; need N > {4 * band:.0f}")
    mol = mollify_step(state, opt.ell)
    amp = amplitude_path(mol, p, q, times, dt, opt.amplitude_cutoff)
    bank = BlockBank(blocks, n)
    v_band = blocks.lam + bank_spec * blocks.r * math.sqrt(2) + opt.amplitude_cutoff
    n_v = max(grid_for_band(max(v_band, low), factor=2), 16)
    v_new = np.empty((n_t, 2, n_v, n_v // 2 + 1), dtype=complex)
    R_new = np.empty((n_t, 2, n, n // 2 + 1), dtype=complex) if opt.keep_stress else None
    pi_new = np.empty((n_t, n, n // 2 + 1), dtype=complex) if opt.keep_stress else None
    rec = {k: np.zeros(n_t) for k in ("v_L2", "v_sup", "grad_v_sup", "dv_L2", "R_L1", "residual", "div_w", "mean_w", "tf", "potential")}
    piece_norms = {name: {"L1": np.zeros(n_t), "Lp": np.zeros(n_t)} for name in PIECES}
    ups = state.upsilon() if state.regime == "multiplicative" else None
    for j in range(n_t):
        t = times[j]
        pulses = bank.pulses(t)
        a_t = snapshot(amp.tilde[j + 1], amp.d_tilde[j], n)
        a_b = a_t if amp.bar is amp.tilde else snapshot(amp.bar[j + 1], amp.d_bar[j], n)
        pert = perturbation(a_b, a_t, pulses, bank, opt.exact_tol)
        dw, mw = divergence_defect(pert.w)
        if dw > opt.exact_tol or mw > opt.exact_tol:
            raise InvariantError(f"w is not divergence-free/mean-zero at t={t:.4g}: {dw:.3g}, {mw:.3g}")
        add = state.regime == "additive"
        snap = Snapshot(
            regime=state.regime,
            m=p.m,
            v_l=hv(resample_half(mol.v_l[j], n)),
            z=hv(state.z_modes(j, n)) if add else None,
            z_l=hv(resample_half(mol.z_l[j], n)) if add else None,
            ups=float(ups[j]) if not add else 1.0,
            ups_l=float(mol.upsilon_l[j + 1]) if not add else 1.0,
            R_l=hv(resample_half(mol.R_l[j + 1], n)),
            pi_l=hv(resample_half(mol.pi_l[j], n)),
            R_com1=hv(resample_half(mol.R_com1[j], n)),
            closing=resample_half(mol.closing[j], n),
        )
        res = assemble(
            snap, pert, a_b, a_t, pulses, bank,
            time_derivative_pc(a_b, pulses, bank),
            time_derivative_potential(a_b, pulses, bank),
            time_derivative_t(a_t, pulses, bank),
            opt.exact_tol,
        )
        if res.residual > opt.residual_tol:
            raise InvariantError(f"closing identity off by {res.residual:.3g} at t={t:.4g}")
        vm = hm(res.v)
        v_new[j] = resample_half(vm, n_v)
        if opt.keep_stress:
            R_new[j] = hm(res.R)
            pi_new[j] = hm(res.pi)
        v_old = hv(resample_half(state.v[j], n))
        rec["v_L2"][j] = lp_vec(res.v, 2)
        rec["v_sup"][j] = lp_vec(res.v, math.inf)
        g = hv(grad(vm))
        rec["grad_v_sup"][j] = float(np.sqrt((g**2).sum(axis=(0, 1))).max())
        rec["dv_L2"][j] = lp_vec(res.v - v_old, 2)
        rec["R_L1"][j] = lp_compact(res.R, 1)
        rec["residual"][j] = res.residual
        rec["div_w"][j] = max(dw, mw)
        rec["mean_w"][j] = mw
        rec["tf"][j] = res.tf_defect
        rec["potential"][j] = pert.potential_defect
        for name in PIECES:
            val = res.pieces[name]
            piece_norms[name]["L1"][j] = lp_compact(val, 1)
            piece_norms[name]["Lp"][j] = lp_compact(val, p.p_star)
        if log is not None:
            log(f"t={t:.5f} residual={res.residual:.2e}")
    # time derivative of the new velocity by backward differences (forward at t = 0)
    dvdt = np.zeros(n_t)
    for j in range(n_t):
        a, b = (j - 1, j) if j > 0 else (0, 1)
        dvdt[j] = float(np.abs(hv(v_new[b] - v_new[a])).max()) / dt if n_t > 1 else 0.0
    c1 = rec["v_sup"] + rec["grad_v_sup"] + dvdt
    bounds = _bounds(state, q + 1, times)
    measured = {
        "v_L2": np.maximum.accumulate(rec["v_L2"]),
        "v_C1": np.maximum.accumulate(c1),
        "R_L1": np.maximum.accumulate(rec["R_L1"]),
        "dv_L2": np.maximum.accumulate(rec["dv_L2"]),
    }
    diag = {
        "level": q + 1,
        "regime": state.regime,
        "grid": n,
        "velocity_grid": n_v,
        "lam": blocks.lam,
        "lam_sigma": bank_spec,
        "r": blocks.r,
        "mu": blocks.mu,
        "block_notes": list(blocks.notes),
        "ell": mol.ell,
        "amplitude_cutoff": opt.amplitude_cutoff,
        "residual_max": float(rec["residual"].max()),
        "div_w_max": float(rec["div_w"].max()),
        "trace_free_defect_max": max(float(rec["tf"].max()), mol.com1_defect),
        "potential_defect_max": float(rec["potential"].max()),
        "geometry_defect": amp.geometry_defect,
        "v_CtL2": float(measured["v_L2"][-1]),
        "v_C1": float(measured["v_C1"][-1]),
        "R_CtL1": float(measured["R_L1"][-1]),
        "dv_CtL2": float(measured["dv_L2"][-1]),
        "pieces": {k: {"L1": float(v["L1"].max()), "Lp": float(v["Lp"].max())} for k, v in piece_norms.items()},
        "bounds": {k: bool(np.all(measured[k] <= bounds[k])) for k in bounds},
        "bound_values": {k: float(bounds[k][-1]) for k in bounds},
        "series": {**rec, "dvdt": dvdt},
        "piece_series": piece_norms,
        "runtime": _time.perf_counter() - started,
    }
    if p.mode == "strict":
        broken = [k for k, ok in diag["bounds"].items() if not ok]
        if broken:
            raise InvariantError("inductive bounds fail: " + ", ".join(broken))
    if not opt.keep_stress:
        R_new = np.zeros((n_t, 2, 2, 2), dtype=complex)
        pi_new = np.zeros((n_t, 2, 2), dtype=complex)
    return replace(state, q=q + 1, v=v_new, R=R_new, pi=pi_new, diagnostics=state.diagnostics + [diag])


def oscillation_norms(state: IterationState, options: StepOptions | None = None) -> dict:
    """max_t L^1 norms of the oscillation stress and its two parts, without the full assembly.

    Only the amplitudes, pulses and the oscillation force live on the fine
    grid, so larger frequencies fit in memory than with ``iterate_step``.
    """
    opt = options or StepOptions()
    p = state.params
    q = state.q
    times = state.grid.times
    blocks = p.blocks(q + 1)
    bank_spec = int(round(blocks.lam * blocks.sigma))
    low = max(state.v_band(), state.noise_band())
    band = assembly_band(blocks.lam, bank_spec, blocks.r, opt.amplitude_cutoff, low)
    n = opt.grid or grid_for_band(band)
    if 4 * band >= n:
        raise GridError(f"grid {n} aliases products of band {band:.1f}; need N > {4 * band:.0f}")
    mol = mollify_step(state, opt.ell)
    amp = amplitude_path(mol, p, q, times, state.grid.dt, opt.amplitude_cutoff)
    bank = BlockBank(blocks, n)
    out = {"R_osc": 0.0, "R_osc_force": 0.0, "R_geo": 0.0}
    for j, t in enumerate(times):
        a_t = snapshot(amp.tilde[j + 1], amp.d_tilde[j], n)
        osc = oscillation(a_t, bank.pulses(t), bank, hv(resample_half(mol.R_l[j + 1], n)))
        del a_t
        r_o, _ = anti_div_compact(drop_mean(hm(osc.force)), opt.exact_tol)
        force = hv(r_o)
        out["R_osc"] = max(out["R_osc"], lp_compact(force + osc.R_geo, 1))
        out["R_osc_force"] = max(out["R_osc_force"], lp_compact(force, 1))
        out["R_geo"] = max(out["R_geo"], lp_compact(osc.R_geo, 1))
    out.update(grid=n, lam=blocks.lam, lam_sigma=bank_spec, r=blocks.r, mu=blocks.mu)
    return out
