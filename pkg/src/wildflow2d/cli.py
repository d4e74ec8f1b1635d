"""Command-line front end: verify, iterate, sweep, noise.

All outputs are CSV (UTF-8, LF). ``report.csv`` files are deterministic for
a given seed and configuration; wall-clock times go to ``timings.csv``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .convex_integration import ConstraintViolation
from .diagnostics import (
    SUITES,
    RunConfig,
    config_echo,
    ell_sweep,
    fit_slope,
    grid_sweep,
    lambda_sweep,
    noise_study,
    run_iteration,
    run_suite,
)
from .noise import dump_path_csv
from .spectral_field import GridError, TorusField, dump_field

REPORT_HEADER = ["name", "status", "value", "threshold"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _write_report(out: Path, checks, echo: str | None = None) -> None:
    rows = [(c.name, c.status, c.value, c.threshold) for c in checks]
    if echo is not None:
        (out / "config.json").parent.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(echo + "\n", encoding="utf-8")
    _write_csv(out / "report.csv", REPORT_HEADER, rows)
    _write_csv(out / "timings.csv", ["name", "runtime"], [(c.name, c.runtime) for c in checks])


def _print_checks(checks) -> None:
    for c in checks:
        print(f"{c.status.upper():8s} {c.name}: {c.value:.3e} (threshold {c.threshold:.3e})")


def _failed(checks) -> bool:
    return any(c.status == "fail" and c.hard for c in checks)


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, args.seed)
    _print_checks(checks)
    if args.out:
        _write_report(Path(args.out), checks, json.dumps({"suite": args.suite, "seed": args.seed}))
    return 1 if _failed(checks) else 0


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.mode is not None:
        cfg.mode = args.mode
    return cfg


def cmd_iterate(args) -> int:
    cfg = _load_config(args)
    try:
        result = run_iteration(cfg, log=None, keep_states=bool(args.out))
    except ConstraintViolation as exc:
        print("constraint violation: " + "; ".join(exc.names), file=sys.stderr)
        return 2
    _print_checks(result.checks)
    for level, name, value, bound, status in result.rows:
        print(f"level {level} {name} = {_fmt(value)} (bound {_fmt(bound)}, {status})")
    if args.out:
        out = Path(args.out)
        _write_report(out, result.checks, config_echo(cfg))
        _write_csv(out / "diagnostics.csv", ["level", "check", "value", "bound", "status"], result.rows)
        for st in result.states:
            j = len(st.times) - 1
            dump_field(TorusField.from_values(st.velocity_values(j)), out / f"v_level{st.q}.wf2d")
            if st.R.shape[-2] > 2:
                dump_field(TorusField.from_values(st.stress_values(j)), out / f"R_level{st.q}.wf2d")
        if result.states:
            dump_path_csv(result.states[0].noise, out / "noise_path.csv")
    return 1 if _failed(result.checks) else 0


def _parse_values(text: str | None, default):
    if not text:
        return default
    return tuple(float(v) for v in text.split(","))


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out) if args.out else None
    if args.axis == "lambda":
        vals = _parse_values(args.values, (100, 200, 400))
        bad = [v for v in vals if v != int(v) or int(v) % 10]
        if bad:
            print(f"inadmissible lambda values {bad}: must be multiples of 10", file=sys.stderr)
            return 2
        rows = lambda_sweep(tuple(int(v) for v in vals), seed=cfg.seed, regime=cfg.regime)
        header = ["lambda", "R_osc_L1", "R_osc_force_L1", "R_geo_L1", "r", "lam_sigma", "mu", "grid"]
        slope = fit_slope([r[0] for r in rows], [r[1] for r in rows])
    elif args.axis == "l":
        vals = _parse_values(args.values, (1.0, 0.5, 0.25, 0.125))
        if any(v <= 0 for v in vals):
            print("l factors must be positive", file=sys.stderr)
            return 2
        rows = ell_sweep(vals, seed=cfg.seed, regime=cfg.regime)
        header = ["l", "R_com1_CtL1", "R_com1_mean_L1"]
        slope = fit_slope([r[0] for r in rows], [r[1] for r in rows])
    else:
        vals = _parse_values(args.values, (512, 1024))
        try:
            rows = grid_sweep(tuple(int(v) for v in vals), seed=cfg.seed)
        except GridError as exc:
            print(f"inadmissible grid: {exc}", file=sys.stderr)
            return 2
        header = ["grid", "residual", "div_w", "trace_free", "potential"]
        slope = math.nan
    for r in rows:
        print(",".join(_fmt(x) for x in r))
    print(f"slope,{_fmt(slope)}")
    if out:
        _write_csv(out / f"sweep_{args.axis}.csv", header, rows + [("slope", slope)])
    return 0


def cmd_noise(args) -> int:
    if args.paths < 1:
        print("paths must be >= 1", file=sys.stderr)
        return 2
    res = noise_study(args.regime, args.paths, n_steps=args.steps, seed=args.seed or 0)
    out = Path(args.out) if args.out else None
    if args.regime == "additive":
        rows = res["modes"]
        for r in rows:
            print(",".join(_fmt(x) for x in r))
        if out:
            _write_csv(out / "noise_modes.csv", ["k1", "k2", "var_x1", "var_x2", "analytic", "ratio"], rows)
    else:
        print(f"upsilon_mean_ratio,{_fmt(res['upsilon_mean_ratio'])}")
        if out:
            _write_csv(out / "noise_upsilon.csv", ["quantity", "value"],
                       [("upsilon_mean_ratio", res["upsilon_mean_ratio"])]
                       + [(f"bound_holds_L={L}", v) for L, v in res["bound_holds"].items()])
    if out:
        _write_csv(out / "stopping_times.csv", ["L", "T_L"], res["stops"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wildflow2d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--mode", choices=("strict", "demo"), default=None)
        sp.add_argument("--config", default=None, help="YAML or JSON run configuration")

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    common(v)
    v.set_defaults(func=cmd_verify)

    it = sub.add_parser("iterate", help="run iteration levels from a configuration")
    common(it)
    it.set_defaults(func=cmd_iterate)

    sw = sub.add_parser("sweep", help="scaling sweeps")
    sw.add_argument("axis", choices=("lambda", "l", "grid"))
    sw.add_argument("--values", default=None, help="comma separated values")
    common(sw)
    sw.set_defaults(func=cmd_sweep)

    nz = sub.add_parser("noise", help="Monte Carlo noise statistics")
    nz.add_argument("--regime", choices=("additive", "multiplicative"), default="additive")
    nz.add_argument("--paths", type=int, default=1000)
    nz.add_argument("--steps", "--grid", dest="steps", type=int, default=100, help="time steps on [0, 1]")
    common(nz)
    nz.set_defaults(func=cmd_noise)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "verify":
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
