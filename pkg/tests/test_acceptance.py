"""End-to-end acceptance criteria.

Each test prints one ``CRITERION k PASS|FAIL`` line (visible in ``pytest -v``
output) before asserting. Seeds are fixed in advance.
"""

import math
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lincfa.cli import main
from lincfa.io import dataset_csv_text, load_csv, save_csv
from lincfa.lab.checks import (
    ARM_SETS,
    closed_form_checks,
    coverage_checks,
    experiment_2d_checks,
    experiment_3d_checks,
    experiment_ddim_checks,
    interval_bruteforce_checks,
    threshold_checks,
)
from lincfa.lab.experiments import run_coverage, run_experiment_2d, run_experiment_3d, run_experiment_ddim
from lincfa.linreg import model_variance_1d, model_variance_2d
from lincfa.reducer import ReducerConfig, build_partition, fit_transform
from lincfa.stats import Dataset
from lincfa.thresholds import (
    delta_bias_asymptotic,
    delta_bias_finite_equal,
    delta_bias_general,
    delta_var_finite_equal,
    delta_var_general,
)

SEED = 0
WORKERS = 4


def report(capsys, k, checks, started):
    failed = [c for c in checks if not c.passed]
    verdict = "PASS" if not failed else "FAIL"
    with capsys.disabled():
        print(f"\nCRITERION {k} {verdict} ({len(checks) - len(failed)}/{len(checks)} checks, {time.perf_counter() - started:.1f}s)")
        for c in checks:
            print(f"    {c.line()}")
    assert not failed, "; ".join(c.line() for c in failed)


class C:
    """Minimal check record for criteria assembled inline."""

    def __init__(self, name, passed, detail=""):
        self.name, self.passed, self.detail = name, bool(passed), detail

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@pytest.fixture(scope="module")
def tables():
    return {
        name: run_experiment_2d(ARM_SETS[name], n=500, reps=500, seed=SEED, workers=WORKERS)
        for name in ("wide", "narrow")
    }


def test_criterion_01_threshold_exactness(capsys):
    t = time.perf_counter()
    report(capsys, 1, threshold_checks(500), t)


def _decision_checks(report_):
    return [c for c in experiment_2d_checks(report_) if not c.name.startswith("mse")]


def test_criterion_02_wide_decisions(capsys, tables):
    t = time.perf_counter()
    report(capsys, 2, _decision_checks(tables["wide"]), t)


def test_criterion_03_narrow_decisions(capsys, tables):
    t = time.perf_counter()
    report(capsys, 3, _decision_checks(tables["narrow"]), t)


def test_criterion_04_mse_not_worse(capsys, tables):
    t = time.perf_counter()
    checks = [c for r in tables.values() for c in experiment_2d_checks(r) if c.name.startswith("mse")]
    assert checks
    report(capsys, 4, checks, t)


def test_criterion_05_closed_form_bias_variance(capsys):
    t = time.perf_counter()
    arms = [(1.0, (0.2, 0.8)), (1.0, (0.47, 0.52))]
    checks, _ = closed_form_checks(arms, n=500, reps=1000, seed=SEED, workers=WORKERS)
    report(capsys, 5, checks, t)


def test_criterion_06_algebraic_identities(capsys):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_eq = worst_gen = 0.0
    most_negative = 0.0
    for _ in range(1000):
        sigma2 = rng.uniform(0.01, 10)
        n = int(rng.integers(5, 5000))
        w1, w2 = rng.uniform(-2, 2, 2)
        rho = rng.uniform(-0.95, 0.95)
        r_hat = rng.uniform(-0.95, 0.95)
        pv = rng.uniform(0.2, 3)
        sv = rng.uniform(0.2, 3)
        # (i) equal variances: direct model-variance difference against the closed form.
        direct = model_variance_2d(sigma2, pv, pv, rho * pv, sv, sv, r_hat * sv, n) - model_variance_1d(
            sigma2, 2 * pv * (1 + rho), 2 * sv * (1 + r_hat), n
        )
        closed = delta_var_finite_equal(sigma2, n, pv, sv, rho, r_hat)
        worst_eq = max(worst_eq, abs(direct - closed) / abs(closed))
        # (ii) unit population variances, arbitrary sample moments.
        v1, v2 = rng.uniform(0.2, 3, 2)
        c = r_hat * math.sqrt(v1 * v2)
        direct = model_variance_2d(sigma2, 1, 1, rho, v1, v2, c, n) - model_variance_1d(sigma2, 2 + 2 * rho, v1 + v2 + 2 * c, n)
        closed = delta_var_general(sigma2, n, v1, v2, c, rho)
        worst_gen = max(worst_gen, abs(direct - closed) / abs(closed))
        # (iii) nonnegativity.
        deltas = [
            closed,
            delta_bias_general(w1, w2, v1, v2, c, rho),
            delta_bias_asymptotic(w1, w2, pv, sv, rho),
            delta_bias_finite_equal(w1, w2, pv, rho),
            delta_var_finite_equal(sigma2, n, pv, sv, rho, r_hat),
        ]
        most_negative = min(most_negative, *deltas)
    checks = [
        C("equal-variance variance identity", worst_eq <= 1e-10, f"max relative error {worst_eq:.2e}"),
        C("general variance identity", worst_gen <= 1e-10, f"max relative error {worst_gen:.2e}"),
        C("differences nonnegative", most_negative >= -1e-12, f"minimum {most_negative:.2e}"),
    ]
    report(capsys, 6, checks, t)


def test_criterion_07_three_feature_bound(capsys):
    t = time.perf_counter()
    checks = interval_bruteforce_checks(trials=200, grid_points=399, seed=SEED)
    checks += experiment_3d_checks(run_experiment_3d(n=500, reps=500, seed=SEED, workers=WORKERS))
    report(capsys, 7, checks, t)


def test_criterion_08_high_dimensional_reduction(capsys):
    t = time.perf_counter()
    r = run_experiment_ddim((150, 300, 500, 1000, 2000), D=100, reps=50, seed=SEED, workers=WORKERS)
    report(capsys, 8, experiment_ddim_checks(r, 500), t)


def test_criterion_09_confidence_coverage(capsys):
    t = time.perf_counter()
    summary = run_coverage(n=500, reps=2000, delta=0.05, seed=SEED, workers=WORKERS)
    report(capsys, 9, coverage_checks(summary), t)


def _random_dataset(rng, n, D):
    mix = rng.uniform(0, 1, size=(D, D)) * (rng.random((D, D)) < 0.4)
    x = rng.normal(size=(n, D)) @ (np.eye(D) + mix)
    y = x @ rng.normal(size=D) + rng.normal(size=n) * rng.uniform(0.1, 5)
    return Dataset(x, tuple(f"f{j}" for j in range(D))), y


def test_criterion_10_pipeline_properties(capsys, tmp_path):
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    cover_ok = identity_ok = csv_ok = True
    for k in range(500):
        d, y = _random_dataset(rng, int(rng.integers(20, 80)), int(rng.integers(2, 9)))
        part, _ = build_partition(d, y, ReducerConfig())
        flat = sorted(j for g in part.groups for j in g)
        cover_ok &= flat == list(range(d.D))
        if k % 10 == 0:
            fitted, reduced = fit_transform(d, y, ReducerConfig())
            identity_ok &= fitted.transform(d).values.tobytes() == reduced.values.tobytes()
            path = tmp_path / "rt.csv"
            save_csv(path, d, y)
            d2, y2 = load_csv(path, "y")
            csv_ok &= d2.values.tobytes() == d.values.tobytes() and y2.tobytes() == y.tobytes()
            csv_ok &= dataset_csv_text(d2, y2) == path.read_text()

    outputs = {}
    for w in (1, 2, 8):
        out = tmp_path / f"w{w}"
        out.mkdir()
        argv_2d = ["validate", "--scenario", "2d", "--reps", "100", "--seed", "7", "--workers", str(w), "--output-dir", str(out)]
        argv_dd = ["validate", "--scenario", "ddim", "--reps", "4", "--n-grid", "150,500", "--seed", "7", "--workers", str(w), "--output-dir", str(out)]
        main(argv_2d)
        main(argv_dd)
        capsys.readouterr()
        outputs[w] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    same = outputs[1] == outputs[2] == outputs[8]
    checks = [
        C("partition is a disjoint cover", cover_ok, "500 random datasets"),
        C("transform reproduces fit_transform bit for bit", identity_ok, "50 datasets"),
        C("CSV round trip is bit-identical", csv_ok, "50 datasets"),
        C("reports identical under 1, 2 and 8 workers", same and len(outputs[1]) >= 5, f"{len(outputs[1])} files compared"),
    ]
    report(capsys, 10, checks, t)
