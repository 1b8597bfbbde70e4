"""Identity vs LinCFA vs PCA on a synthetic high-dimensional dataset.

    python scripts/compare_reducers.py --out results/compare
"""

import argparse
import pathlib
import sys

from lincfa.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/compare")
    ap.add_argument("--n", type=int, default=750)
    ap.add_argument("--D", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "ddim.csv"
    code = main(["synth", "--scenario", "ddim", "--n", str(a.n), "--D", str(a.D), "--sigma", "10",
                 "--seed", str(a.seed), "--output", str(data)])
    if code == 0:
        code = main(["compare", "--input", str(data), "--target", "y", "--output", str(out / "compare.csv")])
    sys.exit(code)
