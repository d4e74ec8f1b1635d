"""Fields on the periodic square [-pi, pi)^2 with spectral calculus.

Collocation points are x_j = 2 pi j / N, which is the same point set as
[-pi, pi) modulo 2 pi, so no phase correction is needed. Arrays use
``indexing='ij'``: the last two axes are (x1, x2). Leading axes hold
components: () scalar, (2,) vector, (2, 2) tensor.

Fourier coefficients follow the e^{ik.x} basis without the (2 pi)^{-2}
factor, so ``modes[..., 0, 0]`` is the mean of the field.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.fft as sfft

TWO_PI = 2.0 * np.pi
AREA = TWO_PI**2

MAGIC = b"WF2D"
DUMP_VERSION = 1


class GridError(ValueError):
    pass


def workers() -> int:
    env = os.environ.get("WF2D_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def check_grid(n: int) -> int:
    n = int(n)
    if n < 2 or n & (n - 1):
        raise GridError(f"grid size must be a power of two, got {n}")
    return n


@lru_cache(maxsize=32)
def wavenumbers(n: int, half: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Integer wavenumber grids (k1, k2) in FFT ordering.

    ``half`` gives the real-FFT layout (n, n//2 + 1) used for real fields.
    """
    k = np.fft.fftfreq(n, 1.0 / n)
    kk = np.arange(n // 2 + 1, dtype=float) if half else k
    k1, k2 = np.meshgrid(k, kk, indexing="ij")
    k1.setflags(write=False)
    k2.setflags(write=False)
    return k1, k2


def layout(shape: tuple) -> tuple[int, bool]:
    """Grid size and half-spectrum flag of a coefficient array."""
    n = shape[-2]
    return n, shape[-1] != n


@lru_cache(maxsize=32)
def wavenumber_norm(n: int, half: bool = False) -> np.ndarray:
    k1, k2 = wavenumbers(n, half)
    out = np.hypot(k1, k2)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def derivative_symbols(n: int, half: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """i k1 and i k2 with the Nyquist row/column zeroed."""
    k1, k2 = wavenumbers(n, half)
    nyq = n // 2
    s1 = 1j * np.where(np.abs(k1) == nyq, 0.0, k1)
    s2 = 1j * np.where(np.abs(k2) == nyq, 0.0, k2)
    s1.setflags(write=False)
    s2.setflags(write=False)
    return s1, s2


def grid_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    x = TWO_PI * np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def to_modes(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    return sfft.fft2(values, axes=(-2, -1), workers=workers()) / (n * n)


def from_modes(modes: np.ndarray, real: bool = True) -> np.ndarray:
    n = modes.shape[-1]
    out = sfft.ifft2(modes * (n * n), axes=(-2, -1), workers=workers())
    return out.real.copy() if real else out


def to_half_modes(values: np.ndarray) -> np.ndarray:
    """Real-FFT coefficients of a real field, normalised like ``to_modes``."""
    n = values.shape[-1]
    return sfft.rfft2(values, axes=(-2, -1), workers=workers()) / (n * n)


def from_half_modes(modes: np.ndarray) -> np.ndarray:
    n = modes.shape[-2]
    return sfft.irfft2(modes * (n * n), s=(n, n), axes=(-2, -1), workers=workers())


def resample(values: np.ndarray, n_new: int) -> np.ndarray:
    """Zero-pad or truncate the spectrum of a real field onto an n_new grid."""
    n = values.shape[-1]
    if n_new == n:
        return values.copy()
    hat = to_modes(values)
    out = np.zeros(values.shape[:-2] + (n_new, n_new), dtype=complex)
    m = min(n, n_new) // 2
    idx_old = np.r_[0:m, n - m + 1 : n] if m > 0 else np.r_[0:1]
    idx_new = np.r_[0:m, n_new - m + 1 : n_new] if m > 0 else np.r_[0:1]
    out[..., idx_new[:, None], idx_new[None, :]] = hat[..., idx_old[:, None], idx_old[None, :]]
    return from_modes(out, real=not np.iscomplexobj(values))


def resample_half(modes: np.ndarray, n_new: int) -> np.ndarray:
    """Pad or truncate a real-FFT coefficient array onto an n_new grid (Nyquist dropped)."""
    n = modes.shape[-2]
    if n_new == n:
        return modes.copy()
    m = min(n, n_new) // 2
    out = np.zeros(modes.shape[:-2] + (n_new, n_new // 2 + 1), dtype=complex)
    out[..., :m, :m] = modes[..., :m, :m]
    out[..., n_new - m + 1 :, :m] = modes[..., n - m + 1 :, :m]
    return out


def max_band(values: np.ndarray, rtol: float = 1e-13) -> float:
    """Largest |k| carrying a coefficient above rtol times the largest one."""
    c = np.abs(to_modes(values))
    if c.ndim > 2:
        c = c.reshape(-1, *c.shape[-2:]).max(axis=0)
    top = c.max()
    if top == 0:
        return 0.0
    kn = wavenumber_norm(c.shape[-1])
    return float(kn[c > rtol * top].max())


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.n_steps < 1:
            raise ValueError("n_steps must be positive")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def __len__(self):
        return self.n_steps + 1


@dataclass(frozen=True, eq=False)
class TorusField:
    """Samples and/or Fourier coefficients of a field on the torus.

    Either representation may be supplied; the other is computed on first
    access and cached. ``components`` is the shape of the leading axes.
    """

    _values: np.ndarray | None = field(default=None, repr=False)
    _modes: np.ndarray | None = field(default=None, repr=False)
    mean_zero: bool = False

    def __post_init__(self):
        arr = self._values if self._values is not None else self._modes
        if arr is None:
            raise ValueError("TorusField needs values or modes")
        if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
            raise GridError("field arrays must end in a square (N, N) grid")
        check_grid(arr.shape[-1])
        if arr.shape[:-2] not in ((), (2,), (2, 2)):
            raise ValueError(f"unsupported component shape {arr.shape[:-2]}")

    @classmethod
    def from_values(cls, values, mean_zero: bool = False) -> "TorusField":
        return cls(_values=np.asarray(values), mean_zero=mean_zero)

    @classmethod
    def from_modes(cls, modes, mean_zero: bool = False) -> "TorusField":
        return cls(_modes=np.asarray(modes, dtype=complex), mean_zero=mean_zero)

    @property
    def sync_flag(self) -> str:
        have = [name for name, arr in (("values", self._values), ("modes", self._modes)) if arr is not None]
        return "+".join(have)

    @property
    def n(self) -> int:
        arr = self._values if self._values is not None else self._modes
        return arr.shape[-1]

    @property
    def components(self) -> tuple:
        arr = self._values if self._values is not None else self._modes
        return arr.shape[:-2]

    @cached_property
    def modes(self) -> np.ndarray:
        if self._modes is not None:
            return self._modes
        return to_modes(self._values)

    @cached_property
    def values(self) -> np.ndarray:
        if self._values is not None:
            return self._values
        v = from_modes(self._modes, real=False)
        if not self.is_complex_modes():
            return v.real.copy()
        return v

    def is_complex_modes(self) -> bool:
        """True when the coefficients are not conjugate-symmetric."""
        c = self.modes
        flipped = np.conj(np.roll(np.flip(c, axis=(-2, -1)), 1, axis=(-2, -1)))
        scale = max(np.abs(c).max(), 1e-300)
        return bool(np.abs(c - flipped).max() > 1e-12 * scale)

    def mode(self, k1: int, k2: int) -> complex | np.ndarray:
        n = self.n
        if max(abs(k1), abs(k2)) > n // 2:
            raise IndexError("wavenumber outside the grid")
        return self.modes[..., k1 % n, k2 % n]

    def check_mean_zero(self, tol: float = 1e-12) -> bool:
        c = np.abs(self.modes)
        return bool(np.all(c[..., 0, 0] <= tol * max(c.max(), 1e-300)))

    def __add__(self, other: "TorusField") -> "TorusField":
        return TorusField.from_values(self.values + other.values)

    def __sub__(self, other: "TorusField") -> "TorusField":
        return TorusField.from_values(self.values - other.values)

    def scale(self, c) -> "TorusField":
        return TorusField.from_values(self.values * c)


def transform(f: TorusField, direction: str = "forward") -> TorusField:
    """Populate the other representation.

    ``forward`` returns a field holding both samples and coefficients built
    from the samples; ``inverse`` rebuilds the samples from the coefficients.
    """
    check_grid(f.n)
    if direction == "forward":
        return TorusField(_values=f.values, _modes=to_modes(f.values), mean_zero=f.mean_zero)
    if direction == "inverse":
        vals = from_modes(f.modes, real=not f.is_complex_modes())
        return TorusField(_values=vals, _modes=f.modes, mean_zero=f.mean_zero)
    raise ValueError(f"unknown direction {direction!r}")


def differentiate(f: TorusField, multi_index: tuple[int, int]) -> TorusField:
    n1, n2 = multi_index
    if n1 < 0 or n2 < 0:
        raise ValueError("derivative orders must be non-negative")
    s1, s2 = derivative_symbols(f.n)
    sym = s1**n1 * s2**n2
    return TorusField.from_modes(f.modes * sym, mean_zero=(n1 + n2) > 0 or f.mean_zero)


def multiply(f: TorusField, g: TorusField) -> TorusField:
    """Pointwise product, de-aliased by padding to 2N and truncating back."""
    n = f.n
    if g.n != n:
        raise GridError("grid mismatch")
    fa = resample(np.asarray(f.values), 2 * n)
    ga = resample(np.asarray(g.values), 2 * n)
    if fa.ndim > 2 and ga.ndim > 2:
        raise ValueError("multiply expects at least one scalar factor")
    prod = fa * ga
    return TorusField.from_values(resample(prod, n))


def lp_norm(values: np.ndarray, p: float) -> float:
    """L^p(T^2) norm by grid quadrature; vectors/tensors use the pointwise Euclidean/Frobenius norm."""
    a = np.abs(values)
    if values.ndim > 2:
        a = np.sqrt((a**2).reshape(-1, *a.shape[-2:]).sum(axis=0))
    if np.isinf(p):
        return float(a.max())
    n = a.shape[-1]
    return float((np.sum(a**p) * AREA / (n * n)) ** (1.0 / p))


def hs_norm(modes: np.ndarray, s: float) -> float:
    n = modes.shape[-1]
    k1, k2 = wavenumbers(n)
    w = (1.0 + k1**2 + k2**2) ** s
    c2 = np.abs(modes) ** 2
    if c2.ndim > 2:
        c2 = c2.reshape(-1, n, n).sum(axis=0)
    return float(np.sqrt(AREA * np.sum(w * c2)))


def cn_norm(modes: np.ndarray, order: int) -> float:
    """Sum over |alpha| <= order of the grid sup of D^alpha f."""
    s1, s2 = derivative_symbols(modes.shape[-1])
    total = 0.0
    for k in range(order + 1):
        for j in range(k + 1):
            d = from_modes(modes * s1 ** (k - j) * s2**j, real=False)
            a = np.abs(d)
            if a.ndim > 2:
                a = np.sqrt((a**2).reshape(-1, *a.shape[-2:]).sum(axis=0))
            total += float(a.max())
    return total


def norm(f: TorusField, kind: str, param: float = 2) -> float:
    """Norms used by the diagnostics.

    kind is ``"Lp"`` (param = p, may be inf), ``"CN"`` (param = N) or
    ``"Hs"`` (param = s).
    """
    if kind == "Lp":
        if param < 1:
            raise ValueError("p must be >= 1")
        return lp_norm(f.values, param)
    if kind == "CN":
        return cn_norm(f.modes, int(param))
    if kind == "Hs":
        return hs_norm(f.modes, param)
    raise ValueError(f"unknown norm kind {kind!r}")


def time_holder_seminorm(path: Sequence[tuple[float, object]], exponent: float, norm_fn=None) -> float:
    """max_{s<t} |f(t) - f(s)| / |t - s|^exponent over the samples of a path.

    Samples are scalars, arrays or TorusFields; ``norm_fn`` maps a
    difference to a non-negative number (default: abs / grid L^2).
    """
    if len(path) < 2:
        raise ValueError("need at least two samples")
    if not 0 < exponent < 1:
        raise ValueError("exponent must lie in (0, 1)")
    times = np.array([t for t, _ in path], dtype=float)
    vals = [v for _, v in path]
    if norm_fn is None and all(np.isscalar(v) for v in vals):
        x = np.array(vals, dtype=float)
        dt = np.abs(times[:, None] - times[None, :])
        np.fill_diagonal(dt, np.inf)
        return float((np.abs(x[:, None] - x[None, :]) / dt**exponent).max())
    if norm_fn is None:
        def norm_fn(d):
            if isinstance(d, TorusField):
                return lp_norm(d.values, 2)
            return lp_norm(np.asarray(d), 2)
    best = 0.0
    for i in range(len(vals)):
        for j in range(i):
            a, b = vals[i], vals[j]
            d = a - b
            best = max(best, norm_fn(d) / abs(times[i] - times[j]) ** exponent)
    return best


def running_holder_seminorm(times: np.ndarray, values: np.ndarray, exponent: float) -> np.ndarray:
    """Seminorm over samples [0..j] for every j; ``values`` has shape (..., n_t).

    Differences are taken on the last axis; any leading axes are batch
    dimensions (independent paths).
    """
    times = np.asarray(times, dtype=float)
    out = np.zeros(values.shape)
    for j in range(1, len(times)):
        q = np.abs(values[..., j : j + 1] - values[..., :j]) / (times[j] - times[:j]) ** exponent
        out[..., j] = np.maximum(out[..., j - 1], q.max(axis=-1))
    return out


def dump_field(f: TorusField, path) -> None:
    """Binary dump: magic, u32 version, u8 components, u32 N, float64 LE samples."""
    vals = np.asarray(f.values)
    if np.iscomplexobj(vals):
        raise ValueError("only real fields can be dumped")
    ncomp = int(np.prod(f.components)) if f.components else 1
    header = MAGIC + struct.pack("<IBI", DUMP_VERSION, ncomp, f.n)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())


def load_field(path) -> TorusField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise ValueError("not a WF2D field dump")
    version, ncomp, n = struct.unpack("<IBI", raw[4:13])
    if version != DUMP_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    data = np.frombuffer(raw[13:], dtype="<f8").astype(float)
    shape = {1: (), 2: (2,), 4: (2, 2)}[ncomp] + (n, n)
    return TorusField.from_values(data.reshape(shape))
