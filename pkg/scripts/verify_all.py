"""Run every invariant suite and write one report per suite."""
import sys
from pathlib import Path

from wildflow2d.cli import main
from wildflow2d.diagnostics import SUITES

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results" / "verify"
    sys.exit(max(main(["verify", s, "--out", str(out / s)]) for s in SUITES))
