"""The velocity increment w = w_p + w_c + w_t built from amplitudes and blocks.

All sums over the eight directions are written as twice the real part of a
sum over the four plus directions: amplitudes and pulses are shared by z and
-z while the carrier e^{i lam z.x} is conjugated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..building_blocks import BlockSpec, plus_directions, pulse_modes
from ..spectral_field import grid_points
from .amplitude import AmplitudeSnapshot
from .fields import InvariantError, div_vec, drop_mean, grad, hm, hv, leray, perp_grad, sparse_to_half
from .params import LevelBlocks


@dataclass
class PulseSnapshot:
    """Pulse values for the four plus directions at one time: (4, n, n) and (4, 2, n, n)."""

    eta: np.ndarray
    grad: np.ndarray
    dt: np.ndarray
    grad_dt: np.ndarray


class BlockBank:
    """Carriers and pulses of one level on the assembly grid."""

    def __init__(self, blocks: LevelBlocks, n: int):
        self.blocks = blocks
        self.n = n
        self.specs = [BlockSpec(z, blocks.lam, blocks.sigma, blocks.r, blocks.mu) for z in plus_directions()]
        self.lam = float(blocks.lam)
        self.mu = float(blocks.mu)
        x1, x2 = grid_points(n)
        self.carriers = np.stack(
            [np.exp(1j * (s.carrier[0] * x1 + s.carrier[1] * x2)) for s in self.specs]
        )
        self.vecs = [z.vec for z in plus_directions()]
        self.perps = [z.perp for z in plus_directions()]

    @property
    def band(self) -> float:
        """Largest |k| of a single block."""
        s = self.specs[0]
        return s.lam + s.pulse_radius

    def pulses(self, t: float) -> PulseSnapshot:
        eta, deta = [], []
        for s in self.specs:
            m0 = pulse_modes(s, t)
            m1 = pulse_modes(s, t, dt_order=1)
            eta.append(sparse_to_half(m0.ks, m0.coefs, self.n))
            deta.append(sparse_to_half(m1.ks, m1.coefs, self.n))
        eta = np.stack(eta)
        deta = np.stack(deta)
        g = np.moveaxis(grad(eta), 0, 1)
        gd = np.moveaxis(grad(deta), 0, 1)
        return PulseSnapshot(hv(eta), hv(g), hv(deta), hv(gd))


@dataclass
class Perturbation:
    """Values (2, n, n) of the pieces and of the potential Phi (n, n)."""

    w_p: np.ndarray
    w_c: np.ndarray
    w_t: np.ndarray
    phi: np.ndarray
    potential_defect: float

    @property
    def w(self) -> np.ndarray:
        return self.w_p + self.w_c + self.w_t


def principal(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    out = np.zeros((2, bank.n, bank.n))
    for i in range(4):
        c = a.val[i] * p.eta[i] * bank.carriers[i]
        perp = bank.perps[i]
        out[0] += 2 * (-c.imag) * perp[0]
        out[1] += 2 * (-c.imag) * perp[1]
    return out


def corrector(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    """2 Re sum_+ grad^perp(a eta) e / lam with the gradient taken by the product rule."""
    out = np.zeros((2, bank.n, bank.n))
    for i in range(4):
        g = a.grad[i] * p.eta[i] + a.val[i] * p.grad[i]
        e = bank.carriers[i].real / bank.lam
        out[0] += -2 * g[1] * e
        out[1] += 2 * g[0] * e
    return out


def potential(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    out = np.zeros((bank.n, bank.n))
    for i in range(4):
        out += 2 * a.val[i] * p.eta[i] * bank.carriers[i].real / bank.lam
    return out


def temporal_source(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    """sum_+ q n z with q = a^2 and n = eta^2 - 1."""
    out = np.zeros((2, bank.n, bank.n))
    for i in range(4):
        f = a.val[i] ** 2 * (p.eta[i] ** 2 - 1.0)
        out[0] += f * bank.vecs[i][0]
        out[1] += f * bank.vecs[i][1]
    return out


def temporal_source_dt(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    """sum_+ (Dq n + q dn) z with Dq = 2 a Da and dn = 2 eta d_t eta."""
    out = np.zeros((2, bank.n, bank.n))
    for i in range(4):
        f = 2 * a.val[i] * a.dval[i] * (p.eta[i] ** 2 - 1.0) + a.val[i] ** 2 * 2 * p.eta[i] * p.dt[i]
        out[0] += f * bank.vecs[i][0]
        out[1] += f * bank.vecs[i][1]
    return out


def temporal(a_tilde: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    src = hm(temporal_source(a_tilde, p, bank))
    return hv(2.0 / bank.mu * leray(drop_mean(src)))


def perturbation(a_bar: AmplitudeSnapshot, a_tilde: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank, tol: float = 1e-10) -> Perturbation:
    w_p = principal(a_bar, p, bank)
    w_c = corrector(a_bar, p, bank)
    phi = potential(a_bar, p, bank)
    w_t = temporal(a_tilde, p, bank)
    lhs = hm(w_p + w_c)
    rhs = perp_grad(hm(phi))
    scale = max(float(np.abs(lhs).max()), 1e-300)
    defect = float(np.abs(lhs - rhs).max()) / scale
    if defect > tol:
        raise InvariantError(f"w_p + w_c differs from grad^perp Phi by {defect:.3g}")
    return Perturbation(w_p, w_c, w_t, phi, defect)


def time_derivative_pc(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    """d_t (w_p + w_c) by the product rule, each factor differentiated separately."""
    out = np.zeros((2, bank.n, bank.n))
    for i in range(4):
        f = a.dval[i] * p.eta[i] + a.val[i] * p.dt[i]
        c = f * bank.carriers[i]
        perp = bank.perps[i]
        out[0] += -2 * c.imag * perp[0]
        out[1] += -2 * c.imag * perp[1]
        g = (a.grad_d[i] * p.eta[i] + a.dval[i] * p.grad[i]
             + a.grad[i] * p.dt[i] + a.val[i] * p.grad_dt[i])
        e = bank.carriers[i].real / bank.lam
        out[0] += -2 * g[1] * e
        out[1] += 2 * g[0] * e
    return out


def time_derivative_potential(a: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    out = np.zeros((bank.n, bank.n))
    for i in range(4):
        out += 2 * (a.dval[i] * p.eta[i] + a.val[i] * p.dt[i]) * bank.carriers[i].real / bank.lam
    return out


def time_derivative_t(a_tilde: AmplitudeSnapshot, p: PulseSnapshot, bank: BlockBank) -> np.ndarray:
    src = hm(temporal_source_dt(a_tilde, p, bank))
    return hv(2.0 / bank.mu * leray(drop_mean(src)))


def divergence_defect(w: np.ndarray) -> tuple[float, float]:
    wm = hm(w)
    scale = max(float(np.abs(wm).max()), 1e-300)
    return float(np.abs(div_vec(wm)).max()) / scale, float(np.abs(wm[:, 0, 0]).max()) / scale
