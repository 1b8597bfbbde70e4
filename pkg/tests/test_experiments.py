import numpy as np
import pytest

from lincfa.errors import InsufficientRepetitionsError, SchemaMismatchError, SingularDesignError
from lincfa.lab.experiments import (
    CURVE_COLUMNS,
    IdentityReducer,
    LinCFAReducer,
    PcaReducer,
    compare_models,
    ci95,
    run_coverage,
    run_experiment_2d,
    run_experiment_3d,
    run_experiment_ddim,
    scores,
    split_train_test,
)
from lincfa.lab.generators import GeneratorSpec, gen_ddim
from lincfa.stats import Dataset


def test_ci95():
    mean, half = ci95([1.0, 3.0])
    assert mean == 2.0
    assert half == pytest.approx(1.96 * np.sqrt(2) / np.sqrt(2))


def test_scores():
    y = np.array([1.0, 2.0, 3.0])
    assert scores(y, y) == (0.0, 1.0)
    assert scores(y, np.full(3, 2.0))[1] == pytest.approx(0.0)


def test_reps_floor():
    with pytest.raises(InsufficientRepetitionsError):
        run_experiment_2d([(1.0, (0.2, 0.8))], reps=10)


def test_2d_report(tmp_path):
    r = run_experiment_2d([(10.0, (0.2, 0.8))], n=200, reps=100, seed=3)
    row = r.rows[0]
    assert row["theo_threshold"] == pytest.approx(1 - 200 / (199 * 0.36))
    assert row["agg_theo"] == 100
    s = r.samples[0]
    assert row["mse_full_ci"] == pytest.approx(ci95(s["mse_full"])[1])
    r.to_csv(tmp_path / "t.csv")
    header = (tmp_path / "t.csv").read_text().splitlines()[0].split(",")
    assert header[:4] == ["arm", "sigma", "w1", "w2"]


@pytest.mark.xfail(
    strict=True,
    reason="per-realization test MSE ties are close to a coin flip near the threshold; "
    "the guarantee holds in expectation only",
)
def test_decision_consistency_directional():
    arms = [(1.0, (0.2, 0.8)), (10.0, (0.2, 0.8)), (1.0, (0.47, 0.52)), (10.0, (0.47, 0.52))]
    r = run_experiment_2d(arms, n=500, reps=200, seed=0)
    fractions = []
    for s in r.samples:
        merged = s["agg_emp"]
        if merged.any():
            fractions.append(np.mean(s["mse_aggr"][merged] <= s["mse_full"][merged]))
    assert min(fractions) >= 0.6, fractions


def test_3d_runner_shape():
    r = run_experiment_3d(n=200, reps=100, seed=1)
    row = r.rows[0]
    assert row["pop_rho13"] > row["pop_rho23"]
    assert row["theo_lower"] <= row["theo_upper"]


def test_ddim_runner_figure_columns(tmp_path):
    r = run_experiment_ddim((150, 300), D=15, reps=3, seed=2)
    r.to_csv(tmp_path / "fig.csv", CURVE_COLUMNS)
    lines = (tmp_path / "fig.csv").read_text().splitlines()
    assert lines[0] == ",".join(CURVE_COLUMNS)
    assert len(lines) == 3


def test_ddim_runner_parallel_identical():
    a = run_experiment_ddim((120,), D=12, reps=4, seed=7, workers=1)
    b = run_experiment_ddim((120,), D=12, reps=4, seed=7, workers=3)
    assert a.rows == b.rows


def test_coverage_summary():
    out = run_coverage(n=200, reps=100, seed=1)
    assert out["theo_conservative_rate"] == 1.0
    assert 0 <= out["implication_rate"] <= 1


class TestCompare:
    def test_identity_on_noiseless_data(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(90, 3))
        y = x @ [1.0, -1.0, 2.0] + 5.0
        train, test = split_train_test(Dataset(x, ("a", "b", "c")), y, 1 / 3, seed=1)
        [row] = compare_models(train, test, [IdentityReducer()])
        assert row["r2"] == pytest.approx(1.0)
        assert row["mse"] == pytest.approx(0.0, abs=1e-20)

    def test_lincfa_beats_identity_on_ddim(self):
        d, y, _ = gen_ddim(GeneratorSpec("ddim", n=600, D=60, sigma=10, seed=1))
        train, test = split_train_test(d, y, 1 / 3, seed=0)
        table = compare_models(train, test, [IdentityReducer(), LinCFAReducer(), PcaReducer()])
        by = {r["method"]: r for r in table}
        assert by["lincfa"]["d"] < 60
        assert by["lincfa"]["r2"] > by["identity"]["r2"]

    def test_constant_column_surfaces_reducer_name(self):
        class Constant(IdentityReducer):
            name = "constant"

            def transform(self, d):
                return Dataset(np.column_stack([np.ones(d.n), np.zeros(d.n) + 2]), ("k", "m"))

        rng = np.random.default_rng(0)
        x = rng.normal(size=(30, 2))
        train, test = split_train_test(Dataset(x, ("a", "b")), x[:, 0], seed=0)
        with pytest.raises(SingularDesignError, match="constant"):
            compare_models(train, test, [Constant()])

    def test_schema_mismatch(self):
        a = Dataset(np.eye(3), ("a", "b", "c"))
        b = Dataset(np.eye(3), ("a", "b", "z"))
        with pytest.raises(SchemaMismatchError):
            compare_models((a, np.zeros(3)), (b, np.zeros(3)), [IdentityReducer()])

    def test_split_sizes(self):
        d = Dataset(np.arange(30.0).reshape(15, 2), ("a", "b"))
        (tr, _), (te, _) = split_train_test(d, np.arange(15.0))
        assert (tr.n, te.n) == (10, 5)
