import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wildflow2d.noise import (
    NoiseSpectrum,
    SpectrumError,
    draw_increments,
    mL,
    simulate_scalar,
    simulate_scalar_batch,
    simulate_z,
    simulate_z_batch,
    spatial_mollify,
    stopping_time,
    time_kernel,
    time_mollify,
    upsilon_bound_holds,
)
from wildflow2d.spectral_field import TimeGrid, lp_norm, running_holder_seminorm, to_half_modes

GRID = TimeGrid(0.0, 1.0, 50)


def test_zero_initial_field():
    p = simulate_z(NoiseSpectrum(cutoff=4), 0.5, GRID, seed=1)
    assert np.abs(p.field_values(0, 16)).max() == 0.0


def test_coordinates_match_grid_l2():
    p = simulate_z(NoiseSpectrum(cutoff=4), 0.5, GRID, seed=2)
    assert abs(p.hs_norm(0.0)[-1] - lp_norm(p.field_values(-1, 32), 2)) < 1e-12


def test_field_is_solenoidal_and_real():
    from wildflow2d.operators import divergence_modes

    p = simulate_z(NoiseSpectrum(cutoff=5), 0.5, GRID, seed=3)
    modes = p.modes_on_grid(10, 32)
    assert np.abs(divergence_modes(modes)).max() < 1e-15
    assert np.abs(np.fft.ifft2(modes).imag).max() < 1e-15


def test_stationary_variance_unit_mode():
    spec = NoiseSpectrum(amplitude=1.0, cutoff=1)
    coords = simulate_z_batch(spec, 0.5, TimeGrid(0.0, 12.0, 24), 10_000, seed=4)
    var = coords[:, -1].var(axis=0)
    assert np.all(np.abs(var / 0.5 - 1) < 0.05)


def test_energy_matches_ito_isometry():
    spec = NoiseSpectrum(amplitude=1.0, cutoff=4)
    grid = TimeGrid(0.0, 0.5, 25)
    coords = simulate_z_batch(spec, 0.5, grid, 10_000, seed=5)
    energy = (coords[:, -1] ** 2).sum(axis=(-2, -1)).mean()
    assert abs(energy / spec.expected_energy(0.5, 0.5) - 1) < 0.05


def test_scalar_initial_values():
    p = simulate_scalar(GRID, seed=6)
    assert p.brownian[0] == 0.0 and p.upsilon[0] == 1.0


def test_lognormal_mean_and_variance():
    b = simulate_scalar_batch(TimeGrid(0.0, 1.0, 20), 100_000, seed=7)
    assert abs(np.exp(b[:, -1]).mean() / math.exp(0.5) - 1) < 0.03
    assert abs(b[:, -1].var() - 1.0) < 0.03


def test_trace_condition_enforced():
    with pytest.raises(SpectrumError):
        NoiseSpectrum(decay=1.0).check(0.5)
    with pytest.raises(SpectrumError):
        NoiseSpectrum().check(1.2)


def test_quiet_path_stops_at_cap():
    p = simulate_scalar(GRID, increments=np.zeros(GRID.n_steps))
    assert stopping_time(p, 5.0, 0.01) == 5.0


@pytest.mark.parametrize("seed", range(5))
def test_huge_cap_never_trips(seed):
    p = simulate_z(NoiseSpectrum(cutoff=4), 0.5, GRID, seed=seed)
    assert stopping_time(p, 1e6, 0.01) == 1e6


def test_loud_path_stops_early():
    p = simulate_scalar(GRID, increments=np.full(GRID.n_steps, 3.0))
    assert stopping_time(p, 2.0, 0.01) < GRID.t_end


def test_upsilon_bound_every_path():
    grid = TimeGrid(0.0, 1.0, 100)
    b = simulate_scalar_batch(grid, 500, seed=8)
    for L in (2.0, 10.0):
        assert all(upsilon_bound_holds(grid.times, path, L, 0.01) for path in b)


def test_m_L_formula():
    assert mL(16.0) == math.sqrt(3) * 2 * math.exp(1.0)


def test_mollify_constant():
    vals = np.full((40, 3), 2.5)
    assert np.abs(time_mollify(vals, 0.2, 0.02) - 2.5).max() < 1e-12


def test_mollify_ramp_shift():
    dt, l = 0.01, 0.1
    t = np.arange(200) * dt
    w = time_kernel(l, dt)
    moment = float(np.sum(w * np.arange(len(w)) * dt))
    out = time_mollify(t, l, dt)
    assert np.abs(out[20:] - (t[20:] - moment)).max() < 1e-12
    assert 0 < moment <= l


def test_mollify_is_causal():
    vals = np.random.default_rng(0).standard_normal(60)
    changed = vals.copy()
    changed[30:] += 1.0
    a, b = time_mollify(vals, 0.1, 0.01), time_mollify(changed, 0.1, 0.01)
    assert np.array_equal(a[:30], b[:30])


def test_mollified_upsilon_close():
    grid = TimeGrid(0.0, 1.0, 400)
    theta = 0.5 - 2 * 0.01
    for seed in range(20):
        u = simulate_scalar(grid, seed=seed).upsilon
        hol = running_holder_seminorm(grid.times, u, theta)[-1]
        for l in (0.02, 0.08):
            err = np.abs(time_mollify(u, l, grid.dt) - u).max()
            assert err <= l**theta * hol


def test_spatial_mollifier_preserves_low_band():
    vals = np.random.default_rng(1).standard_normal((32, 32))
    modes = to_half_modes(vals)
    out = spatial_mollify(modes, 0.05)
    from wildflow2d.spectral_field import wavenumber_norm

    low = wavenumber_norm(32, True) <= 10
    assert np.array_equal(out[low], modes[low])


@given(st.integers(0, 2**32 - 1), st.integers(1, 49))
def test_seed_splice_additive(seed, cut):
    spec = NoiseSpectrum(cutoff=3)
    inc = draw_increments(seed, GRID.n_steps, (len(spec.wavenumbers()), 2))
    other = inc.copy()
    other[cut:] = np.random.default_rng(seed + 1).standard_normal(other[cut:].shape)
    a = simulate_z(spec, 0.5, GRID, increments=inc)
    b = simulate_z(spec, 0.5, GRID, increments=other)
    assert np.array_equal(a.coords[: cut + 1], b.coords[: cut + 1])
    assert stopping_time(a, 1e6, 0.01) == stopping_time(b, 1e6, 0.01)
