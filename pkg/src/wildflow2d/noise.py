"""Stochastic forcing: a spectral Ornstein-Uhlenbeck field, a scalar geometric
Brownian factor, stopping times and causal/spatial mollifiers.

The OU field is stored as its real coordinates in an orthonormal basis of
divergence-free modes,

    e_k^c = (k^perp/|k|) cos(k.x) / (pi sqrt 2),  e_k^s = (k^perp/|k|) sin(k.x) / (pi sqrt 2),

one pair per wavenumber in the upper half plane. Fields are synthesised on
whatever grid the caller asks for.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spectral_field import TimeGrid, check_grid, from_modes, layout, running_holder_seminorm, wavenumber_norm

SIGMA_TILDE = 0.1


class SpectrumError(ValueError):
    pass


def half_plane_modes(cutoff: float) -> np.ndarray:
    """Integer k with 0 < |k| <= cutoff and (k1 > 0 or (k1 == 0 and k2 > 0))."""
    c = int(math.floor(cutoff))
    out = []
    for k1 in range(0, c + 1):
        for k2 in range(-c, c + 1):
            if k1 == 0 and k2 <= 0:
                continue
            if k1 * k1 + k2 * k2 <= cutoff * cutoff:
                out.append((k1, k2))
    return np.array(out, dtype=int).reshape(-1, 2)


@dataclass(frozen=True)
class NoiseSpectrum:
    """Amplitudes g_k = amplitude * |k|^{-decay} for 0 < |k| <= cutoff.

    The trace condition with margin sigma_tilde asks decay > 3 - m + 2 sigma_tilde
    (the extra 1 accounts for two-dimensional mode counting).
    """

    amplitude: float = 1.0
    decay: float | None = None
    cutoff: float = 8.0
    sigma_tilde: float = SIGMA_TILDE

    def resolved_decay(self, m: float) -> float:
        return self.decay if self.decay is not None else 4.0 - m + 2 * self.sigma_tilde

    def check(self, m: float) -> None:
        if not 0 < m < 1:
            raise SpectrumError("m must lie in (0, 1)")
        d = self.resolved_decay(m)
        if d <= 3.0 - m + 2 * self.sigma_tilde:
            raise SpectrumError(f"decay {d} does not meet the trace condition (> {3 - m + 2 * self.sigma_tilde})")
        if self.cutoff < 1:
            raise SpectrumError("cutoff must include |k| = 1")

    def wavenumbers(self) -> np.ndarray:
        return half_plane_modes(self.cutoff)

    def amplitudes(self, m: float) -> np.ndarray:
        k = self.wavenumbers()
        return self.amplitude * np.hypot(k[:, 0], k[:, 1]) ** (-self.resolved_decay(m))

    def expected_energy(self, m: float, t) -> np.ndarray:
        """E ||z(t)||_{L^2}^2 summed over all k != 0 by the Ito isometry."""
        k = self.wavenumbers()
        rate = np.hypot(k[:, 0], k[:, 1]) ** (2 * m)
        g2 = self.amplitudes(m) ** 2
        t = np.asarray(t, dtype=float)[..., None]
        # each half-plane mode carries two real coordinates
        return (2 * g2 * (1 - np.exp(-2 * rate * t)) / (2 * rate)).sum(axis=-1)


def draw_increments(seed, n_steps: int, shape: tuple = ()) -> np.ndarray:
    """Standard normals for every step, drawn in time order; shape (n_steps, *shape)."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_steps,) + tuple(shape))


@dataclass
class NoisePath:
    """One sampled forcing path on a time grid.

    additive: ``coords`` has shape (n_t, n_modes, 2) with the OU coordinates.
    multiplicative: ``brownian`` has shape (n_t,).
    """

    regime: str
    grid: TimeGrid
    seed: object = None
    coords: np.ndarray | None = None
    wavenumbers: np.ndarray | None = None
    brownian: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def upsilon(self) -> np.ndarray:
        return np.exp(self.brownian)

    def fourier_coefficients(self, j: int | slice | None = None) -> np.ndarray:
        """Coefficients c_k (vector, shape (..., n_modes, 2)) at the half-plane wavenumbers."""
        x = self.coords if j is None else self.coords[j]
        k = self.wavenumbers
        kn = np.hypot(k[:, 0], k[:, 1])
        perp = np.stack([-k[:, 1], k[:, 0]], axis=1) / kn[:, None]
        scal = (x[..., 0] - 1j * x[..., 1]) / (2 * math.pi * math.sqrt(2))
        return scal[..., None] * perp

    def modes_on_grid(self, j, n: int, half: bool = False) -> np.ndarray:
        """FFT-ordered coefficient array (2, n, n) of z at time index j; ``half`` keeps k2 >= 0."""
        check_grid(n)
        k = self.wavenumbers
        if np.abs(k).max() >= n // 2:
            raise ValueError("grid too small for the noise cutoff")
        c = self.fourier_coefficients(j)
        out = np.zeros((2, n, n), dtype=complex)
        out[:, k[:, 0] % n, k[:, 1] % n] = c.T
        out[:, (-k[:, 0]) % n, (-k[:, 1]) % n] = np.conj(c.T)
        return out[..., : n // 2 + 1] if half else out

    def field_values(self, j, n: int) -> np.ndarray:
        return from_modes(self.modes_on_grid(j, n))

    def hs_norm(self, s: float) -> np.ndarray:
        """||z(t)||_{H^s} at every grid time."""
        k = self.wavenumbers
        w = (1.0 + k[:, 0] ** 2 + k[:, 1] ** 2) ** s
        return np.sqrt((w * (self.coords**2).sum(axis=-1)).sum(axis=-1))

    def running_hs_holder(self, s: float, exponent: float) -> np.ndarray:
        """Discrete C^exponent_t H^s_x seminorm of z restricted to [0, t_j], for each j."""
        k = self.wavenumbers
        w = np.sqrt((1.0 + k[:, 0] ** 2 + k[:, 1] ** 2) ** s)
        x = (self.coords * w[None, :, None]).reshape(len(self.times), -1)
        t = self.times
        out = np.zeros(len(t))
        for j in range(1, len(t)):
            d = np.linalg.norm(x[j][None, :] - x[:j], axis=1) / (t[j] - t[:j]) ** exponent
            out[j] = max(out[j - 1], d.max())
        return out


def simulate_z(spectrum: NoiseSpectrum, m: float, grid: TimeGrid, seed=0, increments: np.ndarray | None = None) -> NoisePath:
    """Exact-in-law OU update of every mode coordinate; z(0) = 0."""
    spectrum.check(m)
    if grid.dt <= 0:
        raise ValueError("dt must be positive")
    k = spectrum.wavenumbers()
    rate = np.hypot(k[:, 0], k[:, 1]) ** (2 * m)
    g = spectrum.amplitudes(m)
    if increments is None:
        increments = draw_increments(seed, grid.n_steps, (len(k), 2))
    decay = np.exp(-rate * grid.dt)[:, None]
    kick = (g * np.sqrt(-np.expm1(-2 * rate * grid.dt) / (2 * rate)))[:, None]
    coords = np.zeros((grid.n_steps + 1, len(k), 2))
    for j in range(grid.n_steps):
        coords[j + 1] = decay * coords[j] + kick * increments[j]
    return NoisePath("additive", grid, seed, coords=coords, wavenumbers=k, meta={"m": m})


def simulate_z_batch(spectrum: NoiseSpectrum, m: float, grid: TimeGrid, n_paths: int, seed=0) -> np.ndarray:
    """Coordinates for many independent paths at once, shape (n_paths, n_t, n_modes, 2)."""
    spectrum.check(m)
    k = spectrum.wavenumbers()
    rate = np.hypot(k[:, 0], k[:, 1]) ** (2 * m)
    g = spectrum.amplitudes(m)
    rng = np.random.default_rng(seed)
    decay = np.exp(-rate * grid.dt)[:, None]
    kick = (g * np.sqrt(-np.expm1(-2 * rate * grid.dt) / (2 * rate)))[:, None]
    out = np.zeros((n_paths, grid.n_steps + 1, len(k), 2))
    for j in range(grid.n_steps):
        out[:, j + 1] = decay * out[:, j] + kick * rng.standard_normal((n_paths, len(k), 2))
    return out


def simulate_scalar(grid: TimeGrid, seed=0, increments: np.ndarray | None = None) -> NoisePath:
    if increments is None:
        increments = draw_increments(seed, grid.n_steps)
    b = np.concatenate([[0.0], np.cumsum(math.sqrt(grid.dt) * increments)])
    return NoisePath("multiplicative", grid, seed, brownian=b)


def simulate_scalar_batch(grid: TimeGrid, n_paths: int, seed=0) -> np.ndarray:
    """Brownian samples for many paths, shape (n_paths, n_t)."""
    rng = np.random.default_rng(seed)
    inc = math.sqrt(grid.dt) * rng.standard_normal((n_paths, grid.n_steps))
    return np.concatenate([np.zeros((n_paths, 1)), np.cumsum(inc, axis=1)], axis=1)


def mL(L: float) -> float:
    return math.sqrt(3.0) * L**0.25 * math.exp(0.5 * L**0.25)


def holder_exponent(delta: float) -> float:
    return 0.5 - 2 * delta


def _check_stop_args(L: float, delta: float):
    if not 0 < delta < 1 / 12:
        raise ValueError("delta must lie in (0, 1/12)")
    if L <= 1:
        raise ValueError("L must exceed 1")


def stopping_index(path: NoisePath, L: float, delta: float, c_s: float = 1.0, sigma_tilde: float = SIGMA_TILDE) -> int | None:
    """Index of the first grid time where a threshold is reached, or None."""
    _check_stop_args(L, delta)
    theta = holder_exponent(delta)
    if path.regime == "additive":
        if path.coords is None or len(path.times) == 0:
            raise ValueError("empty path")
        size = c_s * path.hs_norm((4 + sigma_tilde) / 2)
        holder = c_s * path.running_hs_holder((2 + sigma_tilde) / 2, theta)
    elif path.regime == "multiplicative":
        if path.brownian is None or len(path.brownian) == 0:
            raise ValueError("empty path")
        size = np.abs(path.brownian)
        holder = running_holder_seminorm(path.times, path.brownian, theta)
    else:
        raise ValueError(f"unknown regime {path.regime!r}")
    hit = np.nonzero((size >= L**0.25) | (holder >= L**0.5))[0]
    return int(hit[0]) if len(hit) else None


def stopping_time(path: NoisePath, L: float, delta: float, regime: str | None = None, c_s: float = 1.0) -> float:
    """First grid time at which the size or Hoelder threshold trips, capped at L."""
    if regime is not None and regime != path.regime:
        raise ValueError("regime does not match the path")
    j = stopping_index(path, L, delta, c_s)
    if j is None:
        return float(L)
    return float(min(path.times[j], L))


def upsilon_bound_holds(times: np.ndarray, brownian: np.ndarray, L: float, delta: float) -> bool:
    """Pathwise check of ||U||_{C^theta} + |U(t)| + |1/U(t)| <= mL^2 on the grid times before the stop."""
    theta = holder_exponent(delta)
    size = np.abs(brownian)
    hold_b = running_holder_seminorm(times, brownian, theta)
    hit = np.nonzero((size >= L**0.25) | (hold_b >= L**0.5))[0]
    stop = hit[0] if len(hit) else len(times)
    stop = min(stop, int(np.searchsorted(times, L, side="right")))
    if stop == 0:
        return True
    t = times[:stop]
    u = np.exp(brownian[:stop])
    semi = running_holder_seminorm(t, u, theta)[-1] if stop > 1 else 0.0
    worst = semi + np.max(u) + np.max(1.0 / u)
    return bool(worst <= mL(L) ** 2)


def upsilon_bound_batch(times: np.ndarray, brownian: np.ndarray, L: float, delta: float) -> np.ndarray:
    """Vectorised version of ``upsilon_bound_holds`` over paths on the first axis."""
    theta = holder_exponent(delta)
    n_t = len(times)
    hold_b = running_holder_seminorm(times, brownian, theta)
    tripped = (np.abs(brownian) >= L**0.25) | (hold_b >= L**0.5)
    stop = np.where(tripped.any(axis=1), tripped.argmax(axis=1), n_t)
    stop = np.minimum(stop, int(np.searchsorted(times, L, side="right")))
    u = np.exp(brownian)
    hold_u = running_holder_seminorm(times, u, theta)
    live = np.arange(n_t)[None, :] < stop[:, None]
    u_max = np.where(live, u, 0.0).max(axis=1)
    inv_max = np.where(live, 1.0 / u, 0.0).max(axis=1)
    semi = np.where(stop > 0, hold_u[np.arange(len(u)), np.maximum(stop - 1, 0)], 0.0)
    return semi + u_max + inv_max <= mL(L) ** 2


def time_kernel(l: float, dt: float) -> np.ndarray:
    """Causal weights w_i on lags i*dt, i = 0..round(l/dt), from the bump (1 - (2s/l - 1)^2)^3 on [0, l]."""
    if not l > dt:
        raise ValueError("mollifier width must exceed the time step")
    n = int(round(l / dt))
    if n < 2:
        raise ValueError("mollifier needs at least two steps of support")
    s = np.arange(n + 1) * dt
    w = (1.0 - (2 * s / l - 1.0) ** 2) ** 3
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def time_mollify(values: np.ndarray, l: float, dt: float) -> np.ndarray:
    """Causal convolution along axis 0; before t = 0 the path is held at its initial value."""
    w = time_kernel(l, dt)
    values = np.asarray(values)
    n_t = values.shape[0]
    out = np.zeros(values.shape, dtype=np.result_type(values, float))
    for i, wi in enumerate(w):
        if wi == 0.0:
            continue
        idx = np.maximum(np.arange(n_t) - i, 0)
        out += wi * values[idx]
    return out


def spatial_symbol(n: int, l: float, half: bool = False) -> np.ndarray:
    """Radial multiplier: 1 for l|k| <= 1/2, 0 for l|k| >= 2, smooth in between."""
    s = l * wavenumber_norm(n, half)
    x = np.clip((s - 0.5) / 1.5, 0.0, 1.0)

    def f(u):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)

    return f(1 - x) / (f(1 - x) + f(x))


def spatial_mollify(modes: np.ndarray, l: float) -> np.ndarray:
    n, half = layout(modes.shape)
    return modes * spatial_symbol(n, l, half)


def dump_path_csv(path: NoisePath, target, extra: dict[str, Sequence[float]] | None = None) -> None:
    """CSV with a header row and one line per grid time."""
    cols: dict[str, Sequence[float]] = {"t": path.times}
    if path.regime == "multiplicative":
        cols["B"] = path.brownian
        cols["Upsilon"] = path.upsilon
    else:
        cols["z_L2"] = path.hs_norm(0.0)
        cols["z_H_top"] = path.hs_norm((4 + SIGMA_TILDE) / 2)
    if extra:
        cols.update(extra)
    with open(target, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([repr(float(v)) for v in row])
