"""Run one demo iteration level in both regimes and leave the CSV/field output under results/."""
import argparse
import sys
from pathlib import Path

from wildflow2d.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(regime: str, out: Path, seed: int) -> int:
    cfg = ROOT / "configs" / f"demo_{regime}.yaml"
    return main(["iterate", "--config", str(cfg), "--out", str(out / regime), "--seed", str(seed)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "results" / "demo"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--regime", choices=("additive", "multiplicative", "both"), default="additive")
    args = ap.parse_args()
    regimes = ("additive", "multiplicative") if args.regime == "both" else (args.regime,)
    codes = [run(r, Path(args.out), args.seed) for r in regimes]
    sys.exit(max(codes))
