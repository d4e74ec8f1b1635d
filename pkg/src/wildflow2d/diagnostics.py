"""Verification suites, run configurations, sweeps and Monte Carlo noise studies.

Every routine returns plain data (lists of ``Check`` or rows of numbers);
``wildflow2d.cli`` handles argument parsing and file output.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .building_blocks import (
    BlockSpec,
    dirichlet_kernel,
    direction_set,
    pulse_modes,
    stationary_flow,
    support_report,
)
from .convex_integration import (
    InvariantError,
    StepOptions,
    check_level_zero,
    derive_parameters,
    initial_pair,
    iterate_step,
    oscillation_norms,
    mollify_step,
    oscillation_identity,
)
from .convex_integration.fields import hv, lp_compact
from .convex_integration.reynolds import mean_flux_defect, orbit_count_check
from .geometry import amplitude_constants, domain_radius, gamma, reconstruct
from .noise import (
    NoisePath,
    NoiseSpectrum,
    simulate_scalar,
    simulate_scalar_batch,
    simulate_z,
    simulate_z_batch,
    stopping_time,
    upsilon_bound_batch,
    upsilon_bound_holds,
)
from .operators import anti_divergence_modes, divergence_modes, fractional_symbol, perp_gradient_modes, tensor_divergence_modes
from .spectral_field import TimeGrid, from_modes, lp_norm, to_modes, wavenumbers

SUITES = ("blocks", "geometry", "operators", "noise", "assembly")
BLOCK_SPECS = ((300, 10, 1), (600, 10, 2), (1000, 10, 3))


@dataclass
class Check:
    name: str
    status: str  # pass | fail | recorded
    value: float
    threshold: float
    runtime: float = 0.0
    hard: bool = True


def _check(name, value, threshold, started, hard=True, recorded=False, upper=True) -> Check:
    ok = value <= threshold if upper else value >= threshold
    status = "recorded" if recorded else ("pass" if ok else "fail")
    return Check(name, status, float(value), float(threshold), time.perf_counter() - started, hard and not recorded)


# ---------------------------------------------------------------- suites


def _carrier_grid(spec: BlockSpec) -> int:
    k = int(np.abs(spec.carrier).max())
    n = 16
    while n // 2 <= k:
        n *= 2
    return n


def suite_blocks(seed: int = 0) -> list[Check]:
    out = []
    for lam, ls, r in BLOCK_SPECS:
        t0 = time.perf_counter()
        spec = BlockSpec(direction_set()[0], lam, ls / lam, r, float(ls))
        tag = f"blocks[{lam},{ls},{r}]"
        worst = 0.0
        for z in direction_set():
            s = spec.with_direction(z)
            b, psi = stationary_flow(s, _carrier_grid(s))
            gp = perp_gradient_modes(psi.modes)
            worst = max(worst, float(np.abs(gp - b.modes).max()))
            worst = max(worst, float(np.abs(divergence_modes(b.modes)).max()))
            lap = -(wavenumbers(psi.n)[0] ** 2 + wavenumbers(psi.n)[1] ** 2) * psi.modes
            worst = max(worst, float(np.abs(lap + lam**2 * psi.modes).max()) / lam**2)
        out.append(_check(f"{tag} stationary identities", worst, 1e-10, t0))
        t0 = time.perf_counter()
        d = dirichlet_kernel(r)
        out.append(_check(f"{tag} kernel L2 norm", abs(lp_norm(d.values, 2) - 2 * math.pi), 1e-10, t0))
        t0 = time.perf_counter()
        worst_t, worst_ms = 0.0, 0.0
        for z in direction_set():
            s = spec.with_direction(z)
            for t in (0.0, 0.37):
                e = pulse_modes(s, t)
                de = pulse_modes(s, t, dt_order=1)
                sign = 1.0 if z.sign_class == "+" else -1.0
                transport = sign * 1j * (e.ks @ z.vec) * e.coefs
                worst_t = max(worst_t, float(np.abs(de.coefs / s.mu - transport).max()))
                worst_ms = max(worst_ms, abs(float(np.sum(np.abs(e.coefs) ** 2)) - 1.0))
        out.append(_check(f"{tag} transport identity", worst_t, 1e-10, t0))
        out.append(_check(f"{tag} unit mean square", worst_ms, 1e-10, t0))
        t0 = time.perf_counter()
        bad = 0
        for z in direction_set():
            for w in direction_set():
                rep = support_report(spec.with_direction(z), w)
                bad += sum(not v for v in rep.values())
        out.append(_check(f"{tag} mode supports", bad, 0, t0))
    return out


def suite_geometry(seed: int = 0, samples: int = 1000) -> list[Check]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    rad = domain_radius()
    worst = 0.0
    for _ in range(samples):
        r = rng.uniform(0, 1) ** 0.5 * rad
        th = rng.uniform(0, 2 * math.pi)
        r1, r2 = r * math.cos(th) / math.sqrt(2), r * math.sin(th) / math.sqrt(2)
        target = np.array([[r1, r2], [r2, -r1]])
        worst = max(worst, float(np.abs(reconstruct((r1, r2)) - target).max()))
    out = [_check("geometry reconstruction", worst, 1e-12, t0)]
    t0 = time.perf_counter()
    r1 = rng.uniform(-0.3, 0.3, 200)
    r2 = rng.uniform(-0.3, 0.3, 200)
    mism = sum(int(np.any(gamma((r1, r2), z) != gamma((r1, r2), -z))) for z in direction_set()[:4])
    out.append(_check("geometry antipodal symmetry", mism, 0, t0))
    t0 = time.perf_counter()
    M, cl = amplitude_constants()
    out.append(_check("geometry growth constant M", M, 1e4, t0, recorded=True))
    return out


def suite_operators(seed: int = 0, samples: int = 100, n: int = 32) -> list[Check]:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = {"div": 0.0, "trace": 0.0, "sym": 0.0, "mean": 0.0}
    for _ in range(samples):
        f = rng.standard_normal((2, n, n))
        fm = to_modes(f)
        nyq = n // 2
        fm[:, nyq, :] = 0
        fm[:, :, nyq] = 0
        R = anti_divergence_modes(fm)
        target = fm.copy()
        target[:, 0, 0] = 0
        scale = float(np.abs(fm).max())
        worst["div"] = max(worst["div"], float(np.abs(tensor_divergence_modes(R) - target).max()) / scale)
        Rv = from_modes(R)
        worst["trace"] = max(worst["trace"], float(np.abs(Rv[0, 0] + Rv[1, 1]).max()))
        worst["sym"] = max(worst["sym"], float(np.abs(Rv[0, 1] - Rv[1, 0]).max()))
        worst["mean"] = max(worst["mean"], float(np.abs(R[..., 0, 0]).max()))
    out = [_check(f"anti-divergence {k}", v, 1e-10, t0) for k, v in worst.items()]
    t0 = time.perf_counter()
    m = 0.5
    n0 = 16
    v0 = np.zeros((2, n0, n0), dtype=complex)
    v0[0, 0, 1], v0[0, 0, n0 - 1] = -0.5j, 0.5j
    lap = v0 * fractional_symbol(n0, m)
    ratio = lp_norm(from_modes(anti_divergence_modes(lap)), 2) / lp_norm(from_modes(v0), 2)
    out.append(_check("anti-divergence shear ratio", ratio, 4.0, t0))
    return out


def suite_noise(seed: int = 0, paths: int = 2000, scalar_paths: int = 20000) -> list[Check]:
    t0 = time.perf_counter()
    m = 0.5
    spec = NoiseSpectrum(amplitude=1.0, cutoff=4)
    grid = TimeGrid(0.0, 0.5, 50)
    coords = simulate_z_batch(spec, m, grid, paths, seed)
    k = spec.wavenumbers()
    rate = np.hypot(k[:, 0], k[:, 1]) ** (2 * m)
    g = spec.amplitudes(m)
    analytic = g**2 * (1 - np.exp(-2 * rate * grid.t_end)) / (2 * rate)
    emp = coords[:, -1].var(axis=0).mean(axis=-1)
    dev = float(np.abs(emp / analytic - 1).max())
    tol = 5 * math.sqrt(2 / (2 * paths))
    out = [_check("noise OU variance ratio", dev, tol, t0)]
    t0 = time.perf_counter()
    sgrid = TimeGrid(0.0, 1.0, 100)
    b = simulate_scalar_batch(sgrid, scalar_paths, seed + 1)
    mean = float(np.exp(b[:, -1]).mean()) / math.exp(0.5)
    out.append(_check("noise lognormal mean", abs(mean - 1), 5 * math.sqrt((math.e - 1) / scalar_paths), t0))
    t0 = time.perf_counter()
    holds = upsilon_bound_batch(sgrid.times, b[:200], 10.0, 0.01)
    out.append(_check("noise Upsilon pathwise bound", float((~holds).sum()), 0, t0))
    return out


def small_assembly_params(regime: str = "additive"):
    return derive_parameters(0.5, 10.0, 10, 2, 0.01, c_R=0.2, regime=regime, lambdas=(10, 50),
                             block_override={"lam_sigma": 10, "r": 1, "mu": 5.0})


def small_assembly_state(regime: str = "additive", seed: int = 0, steps: int = 6, noise_amplitude: float = 0.02):
    ps = small_assembly_params(regime)
    ell = ps.ell(0)
    grid = TimeGrid(0.0, steps * ell / 16, steps)
    if regime == "additive":
        noise = simulate_z(NoiseSpectrum(amplitude=noise_amplitude, cutoff=4), ps.m, grid, seed)
    else:
        noise = simulate_scalar(grid, seed)
    return initial_pair(ps, noise, grid)


def suite_assembly(seed: int = 0) -> list[Check]:
    t0 = time.perf_counter()
    worst = 0.0
    for z in direction_set():
        for w in direction_set():
            lhs, rhs = oscillation_identity(z, w)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    out = [_check("oscillation pair identity", worst, 1e-14, t0)]
    t0 = time.perf_counter()
    out.append(_check("oscillation orbit count", abs(orbit_count_check() - 56), 0, t0))
    t0 = time.perf_counter()
    spec = BlockSpec(direction_set()[0], 100, 0.1, 2, 10.0)
    rng = np.random.default_rng(seed)
    rad = 0.5 * domain_radius()
    flux = max(mean_flux_defect(spec, tuple(rng.uniform(-rad, rad, 2) / 2), 1024, float(t)) for t in (0.0, 0.37))
    out.append(_check("oscillation mean flux", flux, 1e-8, t0))
    for regime in ("additive", "multiplicative"):
        t0 = time.perf_counter()
        st = small_assembly_state(regime, seed)
        out.append(_check(f"assembly[{regime}] level-0 residual", check_level_zero(st), 1e-10, t0))
        t0 = time.perf_counter()
        try:
            st1 = iterate_step(st, StepOptions(amplitude_cutoff=16.0, keep_stress=False))
        except InvariantError:
            out.append(Check(f"assembly[{regime}] step", "fail", math.nan, 0.0, time.perf_counter() - t0))
            continue
        d = st1.diagnostics[-1]
        out.append(_check(f"assembly[{regime}] closing identity", d["residual_max"], 1e-8, t0))
        out.append(_check(f"assembly[{regime}] divergence of w", d["div_w_max"], 1e-10, t0))
        out.append(_check(f"assembly[{regime}] trace-free pieces", d["trace_free_defect_max"], 1e-10, t0))
        out.append(_check(f"assembly[{regime}] potential identity", d["potential_defect_max"], 1e-10, t0))
    return out


def run_suite(name: str, seed: int = 0) -> list[Check]:
    table = {"blocks": suite_blocks, "geometry": suite_geometry, "operators": suite_operators,
             "noise": suite_noise, "assembly": suite_assembly}
    if name == "all":
        return [c for s in SUITES for c in table[s](seed)]
    if name not in table:
        raise ValueError(f"unknown suite {name!r}")
    return table[name](seed)


# ---------------------------------------------------------------- run configuration


@dataclass
class RunConfig:
    m: float = 0.5
    L: float = 10.0
    a: int = 10
    b: int = 2
    beta: float = 0.01
    c_R: float = 0.2
    eta: float | None = None
    regime: str = "additive"
    grid_N: int | None = None
    time_steps: int = 32
    levels: int = 1
    seed: int = 0
    mode: str = "demo"
    t_end: float | None = None
    noise_amplitude: float = 0.02
    noise_cutoff: float = 8.0
    amplitude_cutoff: float = 32.0
    delta: float = 0.01
    lambdas: list | None = None
    block_override: dict | None = None

    @classmethod
    def load(cls, path) -> "RunConfig":
        text = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(text) or {}
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def params(self):
        return derive_parameters(self.m, self.L, self.a, self.b, self.beta, self.mode, c_R=self.c_R,
                                 eta=self.eta, regime=self.regime, lambdas=self.lambdas,
                                 block_override=self.block_override)


def time_grid_for(cfg: RunConfig, params) -> TimeGrid:
    if cfg.t_end is not None:
        return TimeGrid(0.0, cfg.t_end, cfg.time_steps)
    return TimeGrid(0.0, cfg.time_steps * params.ell(0) / 16, cfg.time_steps)


def simulate_noise(cfg: RunConfig, params, grid: TimeGrid, increments=None):
    if cfg.regime == "additive":
        spec = NoiseSpectrum(amplitude=cfg.noise_amplitude, cutoff=cfg.noise_cutoff)
        return simulate_z(spec, params.m, grid, cfg.seed, increments)
    return simulate_scalar(grid, cfg.seed, increments)


@dataclass
class RunResult:
    config: dict
    checks: list
    rows: list  # (level, check, value, bound, status)
    states: list = field(default_factory=list)


def run_iteration(cfg: RunConfig, log=None, keep_states: bool = False) -> RunResult:
    """Level 0 plus ``levels`` iteration steps; strict violations propagate as ConstraintViolation."""
    params = cfg.params()
    grid = time_grid_for(cfg, params)
    noise = simulate_noise(cfg, params, grid)
    rows, checks = [], []
    t0 = time.perf_counter()
    state = initial_pair(params, noise, grid)
    res0 = check_level_zero(state)
    checks.append(_check("level 0 residual", res0, 1e-10, t0))
    stop = stopping_time(noise, params.L, cfg.delta)
    rows.append((0, "stopping_time", stop, grid.t_end, "pass" if stop >= grid.t_end else "recorded"))
    for name in params.violations:
        rows.append((0, f"constraint {name}", 1.0, 0.0, "recorded"))
    if cfg.regime == "multiplicative":
        rows.append((0, "m_L", params.m_L, math.nan, "recorded"))
        ok = upsilon_bound_holds(grid.times, noise.brownian, params.L, cfg.delta)
        rows.append((0, "Upsilon pathwise bound", float(ok), 1.0, "pass" if ok else "fail"))
    v0 = np.array([lp_norm(state.velocity_values(j), 2) for j in range(len(grid.times))])
    R0 = np.array([lp_compact(hv(state.R[j]), 1) for j in range(len(grid.times))])
    rows.append((0, "v_CtL2", float(v0.max()), math.nan, "recorded"))
    rows.append((0, "R_CtL1", float(R0.max()), float(params.M0(grid.t_end) * params.c_R * params.delta(1)), "recorded"))
    states = [state] if keep_states else []
    for _ in range(cfg.levels):
        t0 = time.perf_counter()
        opts = StepOptions(grid=cfg.grid_N, amplitude_cutoff=cfg.amplitude_cutoff,
                           keep_stress=_ < cfg.levels - 1 or keep_states)
        state = iterate_step(state, opts, log)
        d = state.diagnostics[-1]
        q = d["level"]
        checks.append(_check(f"level {q} closing identity", d["residual_max"], 1e-8, t0))
        checks.append(_check(f"level {q} divergence of w", d["div_w_max"], 1e-10, t0))
        checks.append(_check(f"level {q} trace-free pieces", d["trace_free_defect_max"], 1e-10, t0))
        checks.append(_check(f"level {q} potential identity", d["potential_defect_max"], 1e-10, t0))
        for key in ("v_CtL2", "v_C1", "R_CtL1", "dv_CtL2"):
            bkey = {"v_CtL2": "v_L2", "v_C1": "v_C1", "R_CtL1": "R_L1", "dv_CtL2": "dv_L2"}[key]
            ok = d["bounds"][bkey]
            rows.append((q, key, d[key], d["bound_values"][bkey], "pass" if ok else "recorded"))
        for name, vals in d["pieces"].items():
            rows.append((q, f"{name}_L1", vals["L1"], math.nan, "recorded"))
            rows.append((q, f"{name}_Lp*", vals["Lp"], math.nan, "recorded"))
        rows.append((q, "lam", d["lam"], math.nan, "recorded"))
        rows.append((q, "grid", d["grid"], math.nan, "recorded"))
        rows.append((q, "time_steps", len(state.times) - 1, math.nan, "recorded"))
        rows.append((q, "r", d["r"], math.nan, "recorded"))
        rows.append((q, "v_L2_final", float(d["series"]["v_L2"][-1]), math.nan, "recorded"))
        if keep_states:
            states.append(state)
    return RunResult(asdict(cfg), checks, rows, states)


# ---------------------------------------------------------------- sweeps


def fit_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def lambda_sweep(values=(100, 200, 400), seed: int = 0, steps: int = 4, regime: str = "additive",
                 amplitude_cutoff: float = 32.0) -> list[tuple]:
    """max_t ||R_osc||_{L^1} for each lambda_1, with the level-0 state and mollifier fixed."""
    rows = []
    base = derive_parameters(0.5, 10.0, 10, 2, 0.01, c_R=0.2, regime=regime)
    ell = base.ell(0)
    grid = TimeGrid(0.0, steps * ell / 16, steps)
    if regime == "additive":
        noise = simulate_z(NoiseSpectrum(amplitude=0.02, cutoff=8), base.m, grid, seed)
    else:
        noise = simulate_scalar(grid, seed)
    for lam in values:
        if int(lam) != lam or int(lam) % 10:
            raise ValueError(f"lambda values must be multiples of 10, got {lam}")
        ps = derive_parameters(0.5, 10.0, 10, 2, 0.01, c_R=0.2, regime=regime, lambdas=(10, int(lam)))
        st = initial_pair(ps, noise, grid)
        d = oscillation_norms(st, StepOptions(ell=ell, amplitude_cutoff=amplitude_cutoff))
        rows.append((int(lam), d["R_osc"], d["R_osc_force"], d["R_geo"], d["r"], d["lam_sigma"], d["mu"], d["grid"]))
    return rows


def ell_sweep(factors=(1.0, 0.5, 0.25, 0.125), seed: int = 0, horizon_steps: int = 256, regime: str = "additive",
              noise_amplitude: float = 0.02) -> list[tuple]:
    """max_t ||R_com1||_{L^1} under refinement of the mollification width (time grid fixed at the finest)."""
    base = derive_parameters(0.5, 10.0, 10, 2, 0.01, c_R=0.2, regime=regime)
    ell0 = base.ell(0)
    dt = min(factors) * ell0 / 16
    grid = TimeGrid(0.0, horizon_steps * dt, horizon_steps)
    if regime == "additive":
        noise = simulate_z(NoiseSpectrum(amplitude=noise_amplitude, cutoff=8), base.m, grid, seed)
    else:
        noise = simulate_scalar(grid, seed)
    st = initial_pair(base, noise, grid)
    rows = []
    for f in factors:
        ell = f * ell0
        mol = mollify_step(st, ell)
        norms = [lp_compact(hv(mol.R_com1[j]), 1) for j in range(len(grid.times))]
        rows.append((ell, float(max(norms)), float(np.mean(norms))))
    return rows


def grid_sweep(values=(512, 1024), seed: int = 0) -> list[tuple]:
    """Exact invariants of the small assembly configuration on several grids."""
    rows = []
    for n in values:
        st = small_assembly_state("additive", seed)
        st1 = iterate_step(st, StepOptions(grid=int(n), amplitude_cutoff=16.0, keep_stress=False))
        d = st1.diagnostics[-1]
        rows.append((int(n), d["residual_max"], d["div_w_max"], d["trace_free_defect_max"], d["potential_defect_max"]))
    return rows


# ---------------------------------------------------------------- noise study


def noise_study(regime: str, paths: int, n_steps: int = 100, seed: int = 0, t_end: float = 1.0,
                m: float = 0.5, cutoff: float = 4.0, L_values=(2.0, 5.0, 10.0, 1e6), delta: float = 0.01) -> dict:
    """Monte Carlo statistics against analytic oracles plus stopping-time samples."""
    grid = TimeGrid(0.0, t_end, n_steps)
    out = {"regime": regime, "paths": paths}
    if regime == "additive":
        spec = NoiseSpectrum(amplitude=1.0, cutoff=cutoff)
        coords = simulate_z_batch(spec, m, grid, paths, seed)
        k = spec.wavenumbers()
        rate = np.hypot(k[:, 0], k[:, 1]) ** (2 * m)
        analytic = spec.amplitudes(m) ** 2 * (1 - np.exp(-2 * rate * t_end)) / (2 * rate)
        emp = coords[:, -1].var(axis=0)
        out["modes"] = [(int(k[i, 0]), int(k[i, 1]), float(emp[i, 0]), float(emp[i, 1]), float(analytic[i]),
                         float(emp[i].mean() / analytic[i])) for i in range(len(k))]
        stops = []
        sample = min(paths, 200)
        for L in L_values:
            for p in range(sample):
                path = NoisePath("additive", grid, seed, coords=coords[p], wavenumbers=k)
                stops.append((L, stopping_time(path, L, delta)))
        out["stops"] = stops
    elif regime == "multiplicative":
        b = simulate_scalar_batch(grid, paths, seed)
        ups_t = np.exp(b[:, -1])
        out["upsilon_mean_ratio"] = float(ups_t.mean() / math.exp(0.5 * t_end))
        stops = []
        sample = min(paths, 2000)
        for L in L_values:
            ok = upsilon_bound_batch(grid.times, b[:sample], L, delta)
            out.setdefault("bound_holds", {})[L] = int(ok.sum())
            for p in range(min(sample, 200)):
                path = NoisePath("multiplicative", grid, seed, brownian=b[p])
                stops.append((L, stopping_time(path, L, delta)))
        out["stops"] = stops
        out["bound_sample"] = sample
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return out


def config_echo(cfg: RunConfig) -> str:
    return json.dumps(asdict(cfg), sort_keys=True)
