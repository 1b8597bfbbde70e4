"""Coverage of the confidence-interval thresholds and the covariance bounds.

    python scripts/run_coverage.py --out results/coverage --reps 2000
"""

import argparse
import pathlib
import sys

from lincfa.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/coverage")
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    a = ap.parse_args()
    pathlib.Path(a.out).mkdir(parents=True, exist_ok=True)
    sys.exit(main(["validate", "--scenario", "coverage", "--reps", str(a.reps), "--delta", str(a.delta),
                   "--seed", str(a.seed), "--workers", str(a.workers), "--output-dir", a.out]))
