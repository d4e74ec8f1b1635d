"""Oscillation algebra and assembly of the next Reynolds stress and pressure.

For a non-antipodal pair (z, z') the symmetric tensor
S = z^perp (x) z'^perp + z'^perp (x) z^perp - (z.z') Id satisfies
S (z + z') = -(z + z'), which turns the high-high interaction into a
low-frequency force plus a gradient. Pairs are grouped into orbits under
swapping and joint negation: four diagonal orbits of size two and twelve
off-diagonal orbits of size four.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..building_blocks import BlockSpec, Direction, direction_set, intermittent_flow, plus_directions
from ..geometry import gamma
from ..spectral_field import from_modes
from .amplitude import AmplitudeSnapshot
from .fields import (
    InvariantError,
    anti_div_compact,
    compact,
    div_compact,
    div_full,
    div_vec,
    drop_mean,
    frac_lap,
    grad,
    hm,
    hv,
    inv_lap,
    outer,
    perp_grad,
    traceless,
)
from .perturbation import BlockBank, Perturbation, PulseSnapshot


def pair_tensor(z: Direction, w: Direction) -> np.ndarray:
    a, b = z.perp, w.perp
    return np.outer(a, b) + np.outer(b, a) - float(z.vec @ w.vec) * np.eye(2)


def pair_identity_defect(z: Direction, w: Direction) -> float:
    """| S (z + z') + (z + z') | computed in exact rationals, returned as float."""
    z1, z2 = z.exact
    w1, w2 = w.exact
    zp, wp = (-z2, z1), (-w2, w1)
    dot = z1 * w1 + z2 * w2
    s = [[2 * zp[0] * wp[0] - dot, zp[0] * wp[1] + wp[0] * zp[1]],
         [zp[1] * wp[0] + wp[1] * zp[0], 2 * zp[1] * wp[1] - dot]]
    v = (z1 + w1, z2 + w2)
    res = [s[0][0] * v[0] + s[0][1] * v[1] + v[0], s[1][0] * v[0] + s[1][1] * v[1] + v[1]]
    return float(max(abs(x) for x in res))


def oscillation_identity(z: Direction, w: Direction) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of (z^perp (x) z'^perp + z'^perp (x) z^perp)(z + z') = (z.z' - 1)(z + z') in floats."""
    a, b = z.perp, w.perp
    lhs = (np.outer(a, b) + np.outer(b, a)) @ (z.vec + w.vec)
    rhs = (float(z.vec @ w.vec) - 1.0) * (z.vec + w.vec)
    return lhs, rhs


@dataclass(frozen=True)
class Orbit:
    i: int
    j: int
    sign: int  # second direction is sign * plus[j]
    weight: float
    S_plus_I: np.ndarray
    dot_minus_one: float


@lru_cache(maxsize=1)
def orbits() -> tuple[Orbit, ...]:
    plus = plus_directions()
    out = []
    for i in range(4):
        for j in range(i, 4):
            for sign in (1, -1):
                if i == j and sign == -1:
                    continue  # antipodal
                z, w = plus[i], plus[j] if sign == 1 else -plus[j]
                weight = 2.0 if (i == j) else 4.0
                out.append(Orbit(i, j, sign, weight, pair_tensor(z, w) + np.eye(2), float(z.vec @ w.vec) - 1.0))
    return tuple(out)


def orbit_count_check() -> int:
    """Number of ordered non-antipodal pairs covered by the orbits (must be 56)."""
    return int(sum(o.weight for o in orbits()))


@dataclass
class Oscillation:
    force: np.ndarray  # mean-free force before the anti-divergence (2, n, n)
    pressure: np.ndarray
    R_geo: np.ndarray  # compact values (2, n, n)


def oscillation(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank, R_l: np.ndarray) -> Oscillation:
    n = bank.n
    mu = bank.mu
    force = np.zeros((2, n, n))
    pres = np.zeros((n, n))
    Y = np.zeros((2, n, n))
    r_geo = R_l.copy()
    for i in range(4):
        z = bank.vecs[i]
        q = a.val[i] ** 2
        dq = 2 * a.val[i] * a.dval[i]
        gq = 2 * a.val[i] * a.grad[i]
        nn = p.eta[i] ** 2 - 1.0
        coef = (2.0 / mu * dq - 2 * (z[0] * gq[0] + z[1] * gq[1])) * nn
        force[0] += coef * z[0]
        force[1] += coef * z[1]
        pres += q + 2 * q * nn
        y = dq * nn + q * 2 * p.eta[i] * p.dt[i]
        Y[0] += y * z[0]
        Y[1] += y * z[1]
        r_geo[0] -= 2 * q * 0.5 * (z[0] ** 2 - z[1] ** 2)
        r_geo[1] -= 2 * q * z[0] * z[1]
    for o in orbits():
        e = bank.carriers[o.i] * (bank.carriers[o.j] if o.sign == 1 else np.conj(bank.carriers[o.j]))
        A = a.val[o.i] * a.val[o.j]
        gA = a.val[o.i] * a.grad[o.j] + a.val[o.j] * a.grad[o.i]
        P = p.eta[o.i] * p.eta[o.j]
        gP = p.eta[o.i] * p.grad[o.j] + p.eta[o.j] * p.grad[o.i]
        inner = (gA * P + A * gP) * e  # (2, n, n) complex
        M = o.S_plus_I
        force[0] += -0.5 * o.weight * (M[0, 0] * inner[0] + M[0, 1] * inner[1]).real
        force[1] += -0.5 * o.weight * (M[1, 0] * inner[0] + M[1, 1] * inner[1]).real
        pres += -0.5 * o.weight * o.dot_minus_one * (A * P * e).real
    Ym = hm(Y)
    pres = pres - 2.0 / mu * hv(inv_lap(div_vec(Ym)))
    return Oscillation(force, pres, r_geo)


def mean_flux_defect(spec: BlockSpec, rmat: tuple[float, float], n: int, t: float = 0.0) -> float:
    """Quadrature check that w = sum_z gamma_z(R) W_z has mean traceless flux -R.

    Only antipodal pairs carry a mean, each contributing -gamma_z^2 (z (x) z)^o.
    Returns the max entry error relative to |R|.
    """
    w = np.zeros((2, n, n), dtype=complex)
    for z in direction_set():
        w += float(gamma(rmat, z)) * from_modes(intermittent_flow(spec.with_direction(z), t, n).modes, real=False)
    if np.abs(w.imag).max() > 1e-10 * np.abs(w.real).max():
        raise InvariantError("antipodal blocks do not sum to a real field")
    w = w.real
    flux = np.einsum("ixy,jxy->ij", w, w) / n**2
    flux -= 0.5 * np.trace(flux) * np.eye(2)
    target = -np.array([[rmat[0], rmat[1]], [rmat[1], -rmat[0]]])
    return float(np.abs(flux - target).max()) / max(float(np.abs(target).max()), 1e-300)


@dataclass
class Snapshot:
    """Everything the assembly needs at one time on one grid (values unless noted)."""

    regime: str
    m: float
    v_l: np.ndarray
    z: np.ndarray | None
    z_l: np.ndarray | None
    ups: float
    ups_l: float
    R_l: np.ndarray  # compact values
    pi_l: np.ndarray
    R_com1: np.ndarray  # compact values
    closing: np.ndarray  # modes


@dataclass
class Assembly:
    pieces: dict  # compact values of each R piece
    R: np.ndarray  # compact values of the new stress
    pi: np.ndarray
    v: np.ndarray
    residual: float
    tf_defect: float


def assemble(s: Snapshot, pert: Perturbation, a_bar: AmplitudeSnapshot, a_tilde: AmplitudeSnapshot,
             p: PulseSnapshot, bank: BlockBank, dpc: np.ndarray, dphi: np.ndarray, dwt: np.ndarray,
             tol: float = 1e-10) -> Assembly:
    """New stress and pressure plus the closing identity div R - grad pi = sum of explicit terms."""
    add = s.regime == "additive"
    w = pert.w
    X = pert.w_c + pert.w_t
    wm = hm(w)
    k = 1.0 if add else s.ups_l
    base = s.v_l + s.z_l if add else s.v_l
    defects = []

    def tf(full):
        r, d = compact(traceless(full), tol, scale=max(float(np.abs(full).max()), 1e-300))
        defects.append(d)
        return r

    # linear
    lin_src = frac_lap(wm, s.m) + (0.0 if add else 0.5 * wm) + perp_grad(hm(dphi))
    r_lin, d = anti_div_compact(lin_src, tol)
    defects.append(d)
    R_lin = hv(r_lin) + k * tf(outer(base, w) + outer(w, base))
    pi_lin = k * np.sum(base * w, axis=0)
    # correction
    R_cor = k * tf(outer(X, w) + outer(pert.w_p, X))
    pi_cor = k * 0.5 * (np.sum(X * w, axis=0) + np.sum(pert.w_p * X, axis=0))
    # oscillation
    osc = oscillation(a_tilde, p, bank, s.R_l)
    r_o, d = anti_div_compact(drop_mean(hm(osc.force)), tol)
    defects.append(d)
    R_osc_force = hv(r_o)
    R_osc = R_osc_force + osc.R_geo
    pi_osc = osc.pressure
    # second commutator
    v = s.v_l + w
    if add:
        dz = s.z - s.z_l
        R_com2 = tf(outer(v, dz) + outer(dz, v) + outer(s.z, s.z) - outer(s.z_l, s.z_l))
        pi_com2 = np.sum(v * dz, axis=0) + 0.5 * np.sum(s.z**2, axis=0) - 0.5 * np.sum(s.z_l**2, axis=0)
    else:
        R_com2 = tf((s.ups - s.ups_l) * outer(v, v))
        pi_com2 = (s.ups - s.ups_l) * 0.5 * np.sum(v * v, axis=0)
    R = R_lin + R_cor + R_osc + R_com2 + s.R_com1
    pi = s.pi_l - pi_lin - pi_cor - pi_osc - pi_com2
    # closing identity
    lhs = div_compact(hm(R)) - grad(hm(pi))
    t1 = frac_lap(wm, s.m) + (0.0 if add else 0.5 * wm) + hm(dpc) + k * div_full(hm(outer(base, w) + outer(w, base)))
    t2 = k * div_full(hm(outer(X, w) + outer(pert.w_p, X)))
    t3 = k * div_full(hm(outer(pert.w_p, pert.w_p))) + div_compact(hm(s.R_l)) + hm(dwt)
    if add:
        t4 = div_full(hm(outer(v, dz) + outer(dz, v) + outer(s.z, s.z) - outer(s.z_l, s.z_l)))
    else:
        t4 = (s.ups - s.ups_l) * div_full(hm(outer(v, v)))
    rhs = t1 + t2 + t3 + t4 + s.closing
    residual = float(np.abs(lhs - rhs).max()) / max(float(np.abs(rhs).max()), 1e-300)
    pieces = {"R_lin": R_lin, "R_cor": R_cor, "R_osc": R_osc, "R_osc_force": R_osc_force,
              "R_geo": osc.R_geo, "R_com2": R_com2, "R_com1": s.R_com1}
    return Assembly(pieces, R, pi, v, residual, max(defects))


__all__ = ["pair_tensor", "pair_identity_defect", "oscillation_identity", "orbits", "orbit_count_check",
           "oscillation", "mean_flux_defect", "Snapshot", "Assembly", "assemble", "InvariantError", "direction_set"]
