"""High-dimensional reduction over a grid of sample sizes.

Writes ``experiment_ddim.csv`` (all columns) and ``dimension_curve.csv`` (d and R2
per n). With matplotlib installed, ``--plot`` also renders ``dimension_curve.png``.

    python scripts/run_highdim.py --out results/highdim --reps 50
"""

import argparse
import csv
import pathlib
import sys

from lincfa.cli import main


def plot(out: pathlib.Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.DictReader((out / "dimension_curve.csv").open()))
    n = [float(r["n"]) for r in rows]
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.5))
    for key, label in (("d_theo", "theoretical"), ("d_emp", "empirical")):
        left.plot(n, [float(r[key]) for r in rows], marker="o", label=label)
    left.set_xlabel("n")
    left.set_ylabel("median reduced dimension")
    left.legend()
    for key, label in (("r2_full", "full"), ("r2_theo", "theoretical"), ("r2_emp", "empirical")):
        right.plot(n, [float(r[key]) for r in rows], marker="o", label=label)
    right.set_xlabel("n")
    right.set_ylabel("test R2")
    right.legend()
    fig.tight_layout()
    fig.savefig(out / "dimension_curve.png", dpi=120)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/highdim")
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--D", type=int, default=100)
    ap.add_argument("--n-grid", default="150,300,500,1000,2000")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--plot", action="store_true")
    a = ap.parse_args()
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    code = main(["validate", "--scenario", "ddim", "--reps", str(a.reps), "--D", str(a.D), "--n-grid", a.n_grid,
                 "--seed", str(a.seed), "--workers", str(a.workers), "--output-dir", str(out)])
    if a.plot:
        plot(out)
    sys.exit(code)
