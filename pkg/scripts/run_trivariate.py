"""Three-feature experiment plus the interval-versus-brute-force sweep.

    python scripts/run_trivariate.py --out results/trivariate
"""

import argparse
import pathlib
import sys

from lincfa.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/trivariate")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    a = ap.parse_args()
    pathlib.Path(a.out).mkdir(parents=True, exist_ok=True)
    sys.exit(main(["validate", "--scenario", "3d", "--reps", str(a.reps), "--seed", str(a.seed),
                   "--workers", str(a.workers), "--output-dir", a.out]))
