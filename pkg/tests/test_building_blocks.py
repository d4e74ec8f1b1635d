import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wildflow2d.building_blocks import (
    BlockSpec,
    Direction,
    dirichlet_kernel,
    direction_set,
    intermittent_flow,
    min_pair_sum,
    pulse,
    pulse_modes,
    stationary_flow,
    support_report,
)
from wildflow2d.geometry import traceless_outer
from wildflow2d.operators import divergence_modes, perp_gradient_modes
from wildflow2d.spectral_field import from_modes, lp_norm, wavenumbers

DIRS = direction_set()
SPEC = BlockSpec(Direction(3, 4), 100, 0.1, 2, 10.0)


def test_direction_set_members():
    assert len(DIRS) == 8
    z = Direction(3, 4)
    assert z in DIRS
    assert np.allclose(z.perp, [-0.8, 0.6])


def test_min_pair_sum():
    assert abs(min_pair_sum() - math.sqrt(2) / 5) < 1e-15
    # exact: smallest |p + p'|^2 over non-antipodal integer pairs is 2
    best = min((a.p1 + b.p1) ** 2 + (a.p2 + b.p2) ** 2 for a in DIRS for b in DIRS if a != -b)
    assert best == 2


def test_traceless_outer_sum_vanishes():
    total = sum(traceless_outer(z) for z in DIRS)
    assert np.abs(total).max() < 1e-15
    exact = [[sum(Fraction(z.p1 * z.p1 - z.p2 * z.p2, 50) for z in DIRS), sum(Fraction(z.p1 * z.p2, 25) for z in DIRS)]]
    assert exact == [[0, 0]]


def test_direction_validation():
    with pytest.raises(ValueError):
        Direction(1, 2)


def test_block_spec_validation():
    with pytest.raises(ValueError):
        BlockSpec(Direction(3, 4), 105, 0.1, 2, 10.0)
    with pytest.raises(ValueError):
        BlockSpec(Direction(3, 4), 100, 0.13, 2, 10.0)
    with pytest.raises(ValueError):
        BlockSpec(Direction(3, 4), 100, 0.1, 20, 10.0)


def test_shear_wave_single_mode():
    # lam must be a multiple of 10, so lam = 10 puts the carrier at 2 * (3, 4)
    b, psi = stationary_flow(BlockSpec(Direction(3, 4), 10, 1.0, 1, 1.0), 32)
    mags = np.abs(b.modes).max(axis=0)
    assert np.count_nonzero(mags) == 1
    assert mags[6, 8] > 0


@pytest.mark.parametrize("z", DIRS, ids=str)
def test_shear_wave_identities(z):
    spec = SPEC.with_direction(z)
    b, psi = stationary_flow(spec, 256)
    assert np.abs(perp_gradient_modes(psi.modes) - b.modes).max() < 1e-13
    assert np.abs(divergence_modes(b.modes)).max() < 1e-13
    k1, k2 = wavenumbers(256)
    assert np.abs(-(k1**2 + k2**2) * psi.modes + spec.lam**2 * psi.modes).max() < 1e-10
    assert abs(np.abs(psi.values).max() - 1 / spec.lam) < 1e-15


@pytest.mark.parametrize("z", DIRS[:4], ids=str)
def test_conjugate_is_antipode(z):
    b, _ = stationary_flow(SPEC.with_direction(z), 256)
    bm, _ = stationary_flow(SPEC.with_direction(-z), 256)
    assert np.abs(np.conj(b.values) - bm.values).max() < 1e-15


def test_dirichlet_center_value():
    assert abs(dirichlet_kernel(1).values[0, 0] - 3.0) < 1e-13


@pytest.mark.parametrize("r", [1, 2, 5])
def test_dirichlet_l2(r):
    assert abs(lp_norm(dirichlet_kernel(r).values, 2) - 2 * math.pi) < 1e-10


def test_dirichlet_lp_growth():
    rs = np.array([2, 4, 8])
    norms = [lp_norm(dirichlet_kernel(int(r), 128).values, 4) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(norms), 1)[0]
    assert abs(slope - 0.5) <= 0.1


@given(st.floats(0, 10), st.sampled_from(DIRS))
def test_pulse_unit_mean_square(t, z):
    m = pulse_modes(SPEC.with_direction(z), t)
    assert abs(np.sum(np.abs(m.coefs) ** 2) - 1.0) < 1e-10


def test_pulse_unit_mean_square_quadrature():
    eta = pulse(SPEC, 0.7, 256)
    assert abs(np.mean(eta.values**2) - 1.0) < 1e-10


@given(st.floats(0, 10), st.sampled_from(DIRS))
def test_transport_identity(t, z):
    spec = SPEC.with_direction(z)
    e, de = pulse_modes(spec, t), pulse_modes(spec, t, dt_order=1)
    sign = 1.0 if z.sign_class == "+" else -1.0
    assert np.abs(de.coefs / spec.mu - sign * 1j * (e.ks @ z.vec) * e.coefs).max() < 1e-10


def test_transport_identity_on_grid():
    # finite difference in time against the spectral directional derivative
    n, h = 256, 1e-6
    z = Direction(3, 4)
    a = pulse(SPEC, 0.3 + h, n).values
    b = pulse(SPEC, 0.3 - h, n).values
    dt = (a - b) / (2 * h)
    c = pulse(SPEC, 0.3, n).modes
    k1, k2 = wavenumbers(n)
    adv = from_modes(1j * (z.vec[0] * k1 + z.vec[1] * k2) * c)
    assert np.abs(dt / SPEC.mu - adv).max() < 1e-5 * np.abs(adv).max()


@pytest.mark.parametrize("r", [2, 4])
def test_pulse_sup_linear_in_r(r):
    spec = BlockSpec(Direction(3, 4), 100, 0.1, r, 10.0)
    assert np.abs(pulse(spec, 0.0, 512).values).max() <= 3 * r


def test_pulse_shared_by_antipodes():
    assert np.array_equal(pulse_modes(SPEC, 0.4).coefs, pulse_modes(SPEC.with_direction(Direction(-3, -4)), 0.4).coefs)


@pytest.mark.parametrize("spec", [BlockSpec(Direction(3, 4), 300, 1 / 30, 1, 10.0),
                                  BlockSpec(Direction(3, 4), 600, 1 / 60, 2, 10.0)])
def test_support_reports(spec):
    for z in DIRS:
        for w in DIRS:
            assert all(support_report(spec.with_direction(z), w).values())


@pytest.mark.parametrize("z", DIRS[:4], ids=str)
def test_antipodal_mean_flux(z):
    n = 256
    w = intermittent_flow(SPEC.with_direction(z), 0.25, n)
    wm = intermittent_flow(SPEC.with_direction(-z), 0.25, n)
    a, b = from_modes(w.modes, real=False), from_modes(wm.modes, real=False)
    m = np.einsum("ixy,jxy->ij", a, b) / n**2
    m = m - 0.5 * np.trace(m) * np.eye(2)
    assert np.abs(m + traceless_outer(z)).max() < 1e-10
