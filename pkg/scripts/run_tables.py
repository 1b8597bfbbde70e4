"""Two-feature experiments (both weight settings) with closed-form Monte Carlo checks.

    python scripts/run_tables.py --out results/tables --reps 500 --workers 4
"""

import argparse
import pathlib
import sys

from lincfa.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/tables")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    a = ap.parse_args()
    pathlib.Path(a.out).mkdir(parents=True, exist_ok=True)
    sys.exit(main(["validate", "--scenario", "2d", "--arms", "both", "--reps", str(a.reps), "--seed", str(a.seed),
                   "--workers", str(a.workers), "--output-dir", a.out]))
