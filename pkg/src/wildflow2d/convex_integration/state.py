"""The per-level state carried by the iteration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..noise import NoisePath
from ..spectral_field import TimeGrid, layout
from .fields import band_of, div_vec, expand, hv
from .params import ParamSet


@dataclass(frozen=True)
class IterationState:
    """Velocity, Reynolds stress and pressure paths at level q.

    ``v`` has shape (n_t, 2, n, n//2+1) (real-FFT modes); ``R`` holds the
    compact stress (r1, r2) with shape (n_t, 2, n_R, n_R//2+1); ``pi`` has
    shape (n_t, n_R, n_R//2+1). Grids may differ between the three.
    """

    q: int
    regime: str
    params: ParamSet
    noise: NoisePath
    grid: TimeGrid
    v: np.ndarray
    R: np.ndarray
    pi: np.ndarray
    diagnostics: list = field(default_factory=list)

    @property
    def n_v(self) -> int:
        return layout(self.v.shape)[0]

    @property
    def n_R(self) -> int:
        return layout(self.R.shape)[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def v_band(self) -> float:
        return band_of(self.v)

    def velocity_values(self, j: int) -> np.ndarray:
        return hv(self.v[j])

    def stress_values(self, j: int) -> np.ndarray:
        """Full 2x2 stress at time index j."""
        return expand(hv(self.R[j]))

    def noise_band(self) -> float:
        if self.regime == "additive":
            k = self.noise.wavenumbers
            return float(np.hypot(k[:, 0], k[:, 1]).max())
        return 0.0

    def z_modes(self, j: int, n: int) -> np.ndarray:
        """Half-layout modes of z at time index j (zeros in the multiplicative regime)."""
        if self.regime != "additive":
            return np.zeros((2, n, n // 2 + 1), dtype=complex)
        return self.noise.modes_on_grid(j, n, half=True)

    def upsilon(self) -> np.ndarray:
        if self.regime != "multiplicative":
            raise ValueError("Upsilon only exists in the multiplicative regime")
        return self.noise.upsilon

    def check(self, tol: float = 1e-10) -> dict:
        """Divergence and mean of v relative to its size; stress compactness is structural."""
        scale = max(float(np.abs(self.v).max()), 1e-300)
        div = max(float(np.abs(div_vec(self.v[j])).max()) for j in range(len(self.v)))
        mean = float(np.abs(self.v[..., 0, 0]).max())
        return {"div": div / scale, "mean": mean / scale, "ok": div / scale <= tol and mean / scale <= tol}
