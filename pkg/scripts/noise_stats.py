"""Monte Carlo statistics of both forcing models."""
import argparse
import sys
from pathlib import Path

from wildflow2d.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "results" / "noise"))
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--steps", type=int, default=100)
    args = ap.parse_args()
    code = 0
    for regime in ("additive", "multiplicative"):
        code = max(code, main(["noise", "--regime", regime, "--paths", str(args.paths), "--steps", str(args.steps),
                               "--out", str(Path(args.out) / regime)]))
    sys.exit(code)
