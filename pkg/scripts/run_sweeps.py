"""Scaling sweeps in frequency and mollifier width, one CSV per axis with a fitted log-log slope.

The frequency sweep peaks near 4 GB of memory at lambda = 400.
"""
import argparse
import sys
from pathlib import Path

from wildflow2d.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results" / "sweeps"))
    ap.add_argument("--lambdas", default="100,200,400")
    ap.add_argument("--factors", default="1,0.5,0.25,0.125")
    ap.add_argument("--grids", default="512,1024")
    ap.add_argument("--skip-lambda", action="store_true")
    args = ap.parse_args()
    codes = []
    if not args.skip_lambda:
        codes.append(main(["sweep", "lambda", "--values", args.lambdas, "--out", args.out]))
    codes.append(main(["sweep", "l", "--values", args.factors, "--out", args.out]))
    codes.append(main(["sweep", "grid", "--values", args.grids, "--out", args.out]))
    sys.exit(max(codes))
