import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_real_field
from wildflow2d.building_blocks import BlockSpec, Direction, intermittent_flow, intermittent_modes, direction_set, product_support, stationary_flow
from wildflow2d.operators import (
    BandSpec,
    anti_divergence,
    band_project,
    divergence,
    fractional_laplacian,
    gradient,
    leray_project,
    perp_gradient,
    pressure_part,
)
from wildflow2d.spectral_field import TorusField, from_modes, grid_points, lp_norm, to_modes, wavenumber_norm

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("m", [0.25, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("k", [(1, 0), (0, 1), (0, -1)])
def test_unit_frequency_is_fixed(m, k):
    x1, x2 = grid_points(16)
    f = TorusField.from_values(np.exp(1j * (k[0] * x1 + k[1] * x2)))
    g = fractional_laplacian(f, m)
    assert np.abs(g.modes - f.modes).max() < 1e-14


def test_laplacian_eigenvalue():
    x1, _ = grid_points(32)
    f = TorusField.from_values(np.sin(3 * x1))
    g = fractional_laplacian(f, 1.0)
    assert np.abs(g.values - 9 * np.sin(3 * x1)).max() < 1e-12


@given(seeds, st.floats(0.1, 1.5))
def test_forward_inverse(seed, m):
    vals = random_real_field(np.random.default_rng(seed), 32)
    f = TorusField.from_values(vals - vals.mean())
    back = fractional_laplacian(fractional_laplacian(f, m), m, "inverse")
    assert np.abs(back.values - f.values).max() <= 1e-10 * max(np.abs(f.values).max(), 1.0)


@given(seeds)
def test_leray_kills_gradients(seed):
    p = TorusField.from_values(random_real_field(np.random.default_rng(seed), 32))
    assert np.abs(leray_project(gradient(p)).values).max() < 1e-12


@given(seeds)
def test_leray_fixes_solenoidal(seed):
    psi = TorusField.from_values(random_real_field(np.random.default_rng(seed), 32))
    u = perp_gradient(psi)
    assert np.abs(leray_project(u).values - u.values).max() < 1e-12


@pytest.mark.parametrize("z", direction_set()[:3], ids=str)
def test_leray_fixes_shear_waves(z):
    b, _ = stationary_flow(BlockSpec(z, 100, 0.1, 2, 10.0), 256)
    assert np.abs(leray_project(b).modes - b.modes).max() < 1e-14


def test_pulsed_block_is_not_solenoidal():
    # div(eta b) = b . grad eta, and the pulse varies along zeta^perp too
    w = intermittent_flow(BlockSpec(Direction(3, 4), 100, 0.1, 2, 10.0), 0.3, 512)
    assert np.abs(divergence(w).modes).max() > 1e-3


def test_nonzero_band_removes_constant():
    f = TorusField.from_values(np.full((8, 8), 3.0))
    assert np.abs(band_project(f, BandSpec("nonzero")).values).max() == 0.0


def _band(modes, n):
    mask = np.abs(modes).reshape(-1, n, n).max(axis=0) > 0
    return wavenumber_norm(n)[mask]


def test_block_band_admissible_spec():
    spec = BlockSpec(Direction(3, 4), 100, 0.1, 2, 10.0)
    w = intermittent_flow(spec, 0.0, 512)
    kept = band_project(band_project(w, BandSpec("high", 50)), BandSpec("low", 200))
    assert np.array_equal(kept.modes, w.modes)


def test_block_band_small_lambda_example_leaks():
    # lam = 20 with lam*sigma = 10 and r = 2 puts pulse modes at |k| up to
    # 10*2*sqrt 2 ~ 28 around the carrier, beyond the [lam/2, 2 lam] window
    spec = BlockSpec(Direction(3, 4), 20, 0.5, 2, 2.0)
    ks = intermittent_modes(spec, 0.0).ks
    mag = np.hypot(ks[:, 0], ks[:, 1])
    assert mag.max() > 40 and mag.min() < 10


@pytest.mark.parametrize("pair", [(0, 1), (0, 2), (1, 3), (2, 6)])
def test_pair_product_gap(pair):
    dirs = direction_set()
    spec = BlockSpec(dirs[0], 100, 0.1, 2, 10.0)
    n = 512
    a = intermittent_flow(spec.with_direction(dirs[pair[0]]), 0.2, n)
    b = intermittent_flow(spec.with_direction(dirs[pair[1]]), 0.2, n)
    av, bv = from_modes(a.modes, real=False), from_modes(b.modes, real=False)
    prod = to_modes(np.einsum("i...,j...->ij...", av, bv))
    prod = prod - 0.5 * np.einsum("ij,...->ij...", np.eye(2), prod[0, 0] + prod[1, 1])
    P = TorusField.from_modes(prod)
    high = band_project(P, BandSpec("high", 5.0)).modes
    nonzero = band_project(P, BandSpec("nonzero")).modes
    assert np.abs(high - nonzero).max() <= 1e-13 * np.abs(prod).max()
    # exact lattice route: no product wavenumber in 0 < |k| < 5
    ks = product_support(intermittent_modes(spec.with_direction(dirs[pair[0]]), 0.2).ks,
                         intermittent_modes(spec.with_direction(dirs[pair[1]]), 0.2).ks)
    mag = np.hypot(ks[:, 0], ks[:, 1])
    assert not np.any((mag > 0) & (mag < 5))


def test_anti_divergence_of_zero():
    assert np.abs(anti_divergence(TorusField.from_values(np.zeros((2, 8, 8)))).values).max() == 0.0


@given(seeds)
def test_anti_divergence_inverts_div(seed):
    vals = random_real_field(np.random.default_rng(seed), 32, (2,))
    f = TorusField.from_values(vals - vals.mean(axis=(-2, -1), keepdims=True))
    R = anti_divergence(f)
    back = divergence(R)
    assert lp_norm(back.values - f.values, 2) <= 1e-10 * lp_norm(f.values, 2)
    assert np.abs(R.values[0, 0] + R.values[1, 1]).max() < 1e-12
    assert np.abs(R.values[0, 1] - R.values[1, 0]).max() < 1e-12


@pytest.mark.parametrize("m", [0.5, 0.75])
def test_shear_datum_anti_divergence_bound(m):
    _, x2 = grid_points(16)
    v0 = TorusField.from_values(np.stack([np.sin(x2), np.zeros_like(x2)]))
    R = anti_divergence(fractional_laplacian(v0, m))
    assert lp_norm(R.values, 2) <= 4 * lp_norm(v0.values, 2)


@given(seeds)
def test_pressure_part_of_solenoidal(seed):
    psi = TorusField.from_values(random_real_field(np.random.default_rng(seed), 32))
    assert np.abs(pressure_part(perp_gradient(psi)).values).max() < 1e-12


@given(seeds)
def test_pressure_part_inverts_gradient(seed):
    vals = random_real_field(np.random.default_rng(seed), 32)
    p = TorusField.from_values(vals - vals.mean())
    assert np.abs(pressure_part(gradient(p)).values - p.values).max() < 1e-10


@given(seeds)
def test_leray_is_identity_minus_gradient_part(seed):
    u = TorusField.from_values(random_real_field(np.random.default_rng(seed), 32, (2,)))
    direct = leray_project(u).values
    other = u.values - gradient(pressure_part(u)).values
    assert np.abs(direct - other).max() < 1e-10


def test_band_spec_validation():
    with pytest.raises(ValueError):
        BandSpec("band", 3)
    with pytest.raises(ValueError):
        BandSpec("low")
    assert math.isclose(BandSpec("low", 2).threshold, 2)
