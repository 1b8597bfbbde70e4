"""Experiment runners over the synthetic generators, and the model comparison protocol."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigError, InsufficientRepetitionsError, LinCFAError, SchemaMismatchError
from ..io import write_table
from ..linreg import ols_fit
from ..pca import pca_fit, pca_transform
from ..reducer import ReducerConfig, fit_transform, pairwise_decision
from ..stats import Dataset, sample_correlation, standardize
from ..thresholds import (
    Sentinel,
    ThresholdInputs,
    hoeffding_cov_bounds,
    threshold_2d,
    threshold_3d_interval,
    threshold_conf_empirical,
    threshold_conf_theoretical,
    unit_variance_threshold,
)
from .generators import STRUCTURE, TEST, TRAIN, GeneratorSpec, build_structure, rep_rng

MIN_REPS = 100
CURVE_COLUMNS = ("n", "d_theo", "d_emp", "r2_full", "r2_theo", "r2_emp", "mse_full", "mse_theo", "mse_emp")


def _map(fn: Callable[[int], dict], count: int, workers: int) -> list[dict]:
    """Run ``fn`` over ``range(count)``; results come back in index order."""
    if workers <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def ci95(samples) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width."""
    a = np.asarray(samples, dtype=float)
    if a.size < 2:
        return float(a.mean()), math.nan
    return float(a.mean()), float(1.96 * a.std(ddof=1) / math.sqrt(a.size))


def fit_predict(x_train: np.ndarray, y_train: np.ndarray, x_test: np.ndarray) -> np.ndarray:
    """OLS with intercept, implemented by centering on the training means."""
    mx = x_train.mean(axis=0)
    my = y_train.mean()
    fit = ols_fit(x_train - mx, y_train - my)
    return (x_test - mx) @ fit.weights + my


def scores(y: np.ndarray, pred: np.ndarray) -> tuple[float, float]:
    """Test MSE and R^2 (SST about the test mean)."""
    resid = y - pred
    sse = float(resid @ resid)
    yc = y - y.mean()
    return sse / y.size, 1.0 - sse / float(yc @ yc)


@dataclass
class ExperimentReport:
    """Per-arm summary rows plus the per-repetition samples they were computed from."""

    name: str
    rows: list[dict] = field(default_factory=list)
    samples: list[dict[str, np.ndarray]] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for r in self.rows:
            cols.extend(c for c in r if c not in cols)
        return cols

    def to_csv(self, path, columns: Sequence[str] | None = None) -> None:
        write_table(path, self.rows, columns or self.columns)


def _summaries(prefix_samples: dict[str, np.ndarray], names: Sequence[str]) -> dict:
    out = {}
    for name in names:
        mean, half = ci95(prefix_samples[name])
        out[name] = mean
        out[f"{name}_ci"] = half
    return out


def _collect(results: list[dict]) -> dict[str, np.ndarray]:
    return {k: np.array([r[k] for r in results]) for k in results[0]}


def _check_reps(reps: int) -> None:
    if reps < MIN_REPS:
        raise InsufficientRepetitionsError(f"need at least {MIN_REPS} repetitions, got {reps}")


# --------------------------------------------------------------------------
# Two features
# --------------------------------------------------------------------------


def run_experiment_2d(
    arms: Sequence[tuple[float, Sequence[float]]],
    n: int = 500,
    reps: int = 500,
    seed: int = 0,
    *,
    mix: float = 0.7,
    test_n: int | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Bivariate arms ``(sigma, (w1, w2))``: thresholds, decisions and scores per repetition."""
    _check_reps(reps)
    report = ExperimentReport("2d")
    T = test_n or n
    for arm, (sigma, w) in enumerate(arms):
        w = tuple(float(v) for v in w)
        spec = GeneratorSpec("bivariate", n=n, sigma=sigma, weights=w, mix=mix, seed=seed)
        st = build_structure(spec)
        s2 = sigma**2
        theo_thr = unit_variance_threshold(s2, n, *w)
        theo_cfg = ReducerConfig("theoretical", known_weights=w, known_sigma2=s2)
        emp_cfg = ReducerConfig("empirical")

        def one(r: int) -> dict:
            d, y = st.sample(n, rep_rng(seed, arm, r, TRAIN))
            dt, yt = st.sample(T, rep_rng(seed, arm, r, TEST))
            z, state = standardize(d)
            zt = state.apply(dt).values
            x1, x2 = z.values[:, 0], z.values[:, 1]
            theo = pairwise_decision(x1, x2, y, theo_cfg, 0, 1)
            emp = pairwise_decision(x1, x2, y, emp_cfg, 0, 1)
            fit = ols_fit(z.values, y - y.mean())
            mse_full, r2_full = scores(yt, fit_predict(z.values, y, zt))
            agg_tr = z.values.mean(axis=1, keepdims=True)
            agg_te = zt.mean(axis=1, keepdims=True)
            mse_aggr, r2_aggr = scores(yt, fit_predict(agg_tr, y, agg_te))
            emp_thr = emp.threshold if isinstance(emp.threshold, float) else (1.0 if emp.threshold is Sentinel.NEVER else -math.inf)
            return {
                "rho_hat": theo.correlation,
                "emp_threshold": emp_thr,
                "s2_hat": fit.residual_variance,
                "w1_hat": fit.weights[0],
                "w2_hat": fit.weights[1],
                "agg_theo": theo.aggregate,
                "agg_emp": emp.aggregate,
                "mse_full": mse_full,
                "mse_aggr": mse_aggr,
                "r2_full": r2_full,
                "r2_aggr": r2_aggr,
                "mse_emp": mse_aggr if emp.aggregate else mse_full,
                "r2_emp": r2_aggr if emp.aggregate else r2_full,
            }

        s = _collect(_map(one, reps, workers))
        row = {
            "arm": arm,
            "sigma": sigma,
            "w1": w[0],
            "w2": w[1],
            "n": n,
            "reps": reps,
            "theo_threshold": theo_thr if isinstance(theo_thr, float) else theo_thr.value,
            "emp_threshold": float(np.median(s["emp_threshold"])),
            "rho_hat": float(s["rho_hat"].mean()),
            "pop_rho": float(st.pop_corr[0, 1]),
            "s2_hat": float(s["s2_hat"].mean()),
            "w1_hat": float(s["w1_hat"].mean()),
            "w2_hat": float(s["w2_hat"].mean()),
            "agg_theo": int(s["agg_theo"].sum()),
            "agg_emp": int(s["agg_emp"].sum()),
        }
        row.update(_summaries(s, ["r2_full", "r2_aggr", "r2_emp", "mse_full", "mse_aggr", "mse_emp"]))
        report.rows.append(row)
        report.samples.append(s)
    return report


# --------------------------------------------------------------------------
# Three features
# --------------------------------------------------------------------------


def run_experiment_3d(
    n: int = 500,
    reps: int = 500,
    seed: int = 0,
    *,
    sigma: float = 0.5,
    weights: Sequence[float] = (0.4, 0.6, 0.2),
    test_n: int | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Averaging ``x1, x2`` with ``x3`` kept: interval decisions and scores."""
    _check_reps(reps)
    w = tuple(float(v) for v in weights)
    spec = GeneratorSpec("trivariate", n=n, sigma=sigma, weights=w, seed=seed)
    st = build_structure(spec)
    P = st.pop_corr
    s2 = sigma**2
    T = test_n or n

    def theo_inputs(rho12: float) -> ThresholdInputs:
        return ThresholdInputs(s2, n, w[0], w[1], w3=w[2], rho13=P[0, 2], rho23=P[1, 2], correlation=rho12)

    theo_interval = threshold_3d_interval(theo_inputs(P[0, 1])).threshold

    def one(r: int) -> dict:
        d, y = st.sample(n, rep_rng(seed, 0, r, TRAIN))
        dt, yt = st.sample(T, rep_rng(seed, 0, r, TEST))
        z, state = standardize(d)
        zt = state.apply(dt).values
        Z = z.values
        rho12 = sample_correlation(Z[:, 0], Z[:, 1])
        theo = threshold_3d_interval(theo_inputs(rho12))
        fit = ols_fit(Z, y - y.mean())
        emp = threshold_3d_interval(
            ThresholdInputs(
                fit.residual_variance,
                n,
                float(fit.weights[0]),
                float(fit.weights[1]),
                w3=float(fit.weights[2]),
                rho13=sample_correlation(Z[:, 0], Z[:, 2]),
                rho23=sample_correlation(Z[:, 1], Z[:, 2]),
                correlation=rho12,
            )
        )
        mse_full, r2_full = scores(yt, fit_predict(Z, y, zt))
        A = np.array([[0.5, 0.0], [0.5, 0.0], [0.0, 1.0]])
        mse_aggr, r2_aggr = scores(yt, fit_predict(Z @ A, y, zt @ A))
        lo, hi = emp.threshold if isinstance(emp.threshold, tuple) else (math.nan, math.nan)
        return {
            "rho12_hat": rho12,
            "emp_lower": lo,
            "emp_upper": hi,
            "agg_theo": theo.aggregate,
            "agg_emp": emp.aggregate,
            "mse_full": mse_full,
            "mse_aggr": mse_aggr,
            "r2_full": r2_full,
            "r2_aggr": r2_aggr,
        }

    s = _collect(_map(one, reps, workers))
    lo, hi = theo_interval if isinstance(theo_interval, tuple) else (math.nan, math.nan)
    row = {
        "sigma": sigma,
        "w1": w[0],
        "w2": w[1],
        "w3": w[2],
        "n": n,
        "reps": reps,
        "pop_rho12": float(P[0, 1]),
        "pop_rho13": float(P[0, 2]),
        "pop_rho23": float(P[1, 2]),
        "theo_lower": lo,
        "theo_upper": hi,
        "emp_lower": float(np.nanmedian(s["emp_lower"])) if np.any(np.isfinite(s["emp_lower"])) else math.nan,
        "emp_upper": float(np.nanmedian(s["emp_upper"])) if np.any(np.isfinite(s["emp_upper"])) else math.nan,
        "rho12_hat": float(s["rho12_hat"].mean()),
        "agg_theo": int(s["agg_theo"].sum()),
        "agg_emp": int(s["agg_emp"].sum()),
    }
    row.update(_summaries(s, ["r2_full", "r2_aggr", "mse_full", "mse_aggr"]))
    report = ExperimentReport("3d", [row], [s])
    return report


# --------------------------------------------------------------------------
# D features
# --------------------------------------------------------------------------


def run_experiment_ddim(
    n_grid: Sequence[int] = (500,),
    D: int = 100,
    reps: int = 50,
    seed: int = 0,
    *,
    sigma: float = 10.0,
    mix: float = 0.7,
    test_n: int = 500,
    workers: int = 1,
) -> ExperimentReport:
    """Reduced dimension and scores of the greedy reduction across sample sizes.

    Repetition ``r`` draws its own parent map and weights from ``(seed, r)``;
    the same structures are reused at every sample size, so the sweep isolates
    the effect of ``n``.
    """
    if reps < 1:
        raise InsufficientRepetitionsError("need at least one repetition")
    spec = GeneratorSpec("ddim", n=max(n_grid), sigma=sigma, D=D, mix=mix, seed=seed)
    report = ExperimentReport("ddim")
    for arm, n in enumerate(n_grid):

        def one(r: int, n=n, arm=arm) -> dict:
            st = build_structure(spec, rep_rng(seed, 0, r, STRUCTURE))
            theo_cfg = ReducerConfig(
                "theoretical", known_weights=tuple(float(v) for v in st.weights), known_sigma2=sigma**2
            )
            d, y = st.sample(n, rep_rng(seed, arm, r, TRAIN))
            dt, yt = st.sample(test_n, rep_rng(seed, arm, r, TEST))
            out = {}
            z, state = standardize(d)
            mse, r2 = scores(yt, fit_predict(z.values, y, state.apply(dt).values))
            out.update(mse_full=mse, r2_full=r2)
            for tag, cfg in (("theo", theo_cfg), ("emp", ReducerConfig("empirical"))):
                fitted, red = fit_transform(d, y, cfg)
                mse, r2 = scores(yt, fit_predict(red.values, y, fitted.transform(dt).values))
                out.update({f"d_{tag}": fitted.d, f"mse_{tag}": mse, f"r2_{tag}": r2})
            return out

        s = _collect(_map(one, reps, workers))
        row = {
            "n": n,
            "d_theo": float(np.median(s["d_theo"])),
            "d_emp": float(np.median(s["d_emp"])),
        }
        row.update(_summaries(s, ["r2_full", "r2_theo", "r2_emp", "mse_full", "mse_theo", "mse_emp"]))
        row.update(D=D, reps=reps, sigma=sigma)
        report.rows.append(row)
        report.samples.append(s)
    return report


# --------------------------------------------------------------------------
# Confidence thresholds and covariance bounds
# --------------------------------------------------------------------------


def run_coverage(
    n: int = 500,
    reps: int = 2000,
    delta: float = 0.05,
    seed: int = 0,
    *,
    sigma: float = 0.25,
    weights: Sequence[float] = (0.47, 0.52),
    mix: float = 0.7,
    workers: int = 1,
) -> dict:
    """Simulate the bivariate Gaussian model and tally how often the bounds hold.

    Features are the population-standardized pair (zero mean, unit variance),
    fitted without intercept, as in the derivation of the bounds.
    """
    _check_reps(reps)
    w1, w2 = (float(v) for v in weights)
    s2 = sigma**2
    st = build_structure(GeneratorSpec("bivariate", n=n, sigma=sigma, weights=(w1, w2), mix=mix, seed=seed))
    raw = GeneratorSpec("bivariate", n=n, sigma=sigma, weights=(w1, w2), mix=mix, seed=seed, standardized=False)
    st_raw = build_structure(raw)
    pop_cov_raw = float(st_raw.raw_cov[0, 1])
    upper_dev, lower_dev = hoeffding_cov_bounds(n, delta)
    asym = unit_variance_threshold(s2, n, w1, w2)
    conf_theo = threshold_conf_theoretical(s2, 1.0, w1, w2, n, delta)

    def one(r: int) -> dict:
        d, y = st.sample(n, rep_rng(seed, 0, r, TRAIN))
        X = d.values
        fit = ols_fit(X, y)
        var_pool = 0.5 * (X[:, 0].var(ddof=1) + X[:, 1].var(ddof=1))
        rho = sample_correlation(X[:, 0], X[:, 1])
        t_emp = threshold_conf_empirical(fit, var_pool, n, delta)
        t_true = unit_variance_threshold(s2, n, w1, w2, var_x=var_pool)
        xr = st_raw.features(n, rep_rng(seed, 1, r, TRAIN))
        c_hat = float(np.cov(xr[:, 0], xr[:, 1], ddof=1)[0, 1])
        return {
            "implication": (not rho >= t_emp) or rho >= t_true,
            "dominates": t_emp >= t_true,
            "emp_event": rho >= t_emp,
            "theo_conservative": conf_theo > asym,
            "hoeffding_violation": (c_hat - pop_cov_raw > upper_dev) or (pop_cov_raw - c_hat > lower_dev),
            "t_emp": t_emp,
            "t_true": t_true,
        }

    s = _collect(_map(one, reps, workers))
    out = {"n": n, "reps": reps, "delta": delta, "sigma": sigma, "w1": w1, "w2": w2}
    for key in ("implication", "dominates", "emp_event", "theo_conservative", "hoeffding_violation"):
        p = float(s[key].mean())
        out[f"{key}_rate"] = p
    out["binomial_se"] = math.sqrt(delta * (1 - delta) / reps)
    out["t_emp_median"] = float(np.median(s["t_emp"]))
    out["t_true_median"] = float(np.median(s["t_true"]))
    out["asymptotic_threshold"] = asym
    out["conf_theoretical_threshold"] = conf_theo
    out["samples"] = s
    return out


# --------------------------------------------------------------------------
# Model comparison
# --------------------------------------------------------------------------


class IdentityReducer:
    name = "identity"

    def fit(self, d: Dataset, y) -> "IdentityReducer":
        _, self.state = standardize(d)
        return self

    @property
    def d(self) -> int:
        return len(self.state.column_names)

    def transform(self, d: Dataset) -> Dataset:
        return self.state.apply(d)


class LinCFAReducer:
    def __init__(self, config: ReducerConfig | None = None, name: str = "lincfa"):
        self.config = config or ReducerConfig()
        self.name = name

    def fit(self, d: Dataset, y) -> "LinCFAReducer":
        self.fitted, _ = fit_transform(d, y, self.config)
        return self

    @property
    def d(self) -> int:
        return self.fitted.d

    def transform(self, d: Dataset) -> Dataset:
        return self.fitted.transform(d)


class PcaReducer:
    def __init__(self, variance_fraction: float = 0.95, name: str = "pca"):
        self.variance_fraction = variance_fraction
        self.name = name

    def fit(self, d: Dataset, y) -> "PcaReducer":
        z, self.state = standardize(d)
        self.model = pca_fit(z, self.variance_fraction)
        return self

    @property
    def d(self) -> int:
        return self.model.retained

    def transform(self, d: Dataset) -> Dataset:
        return pca_transform(self.model, self.state.apply(d))


def compare_models(train: tuple[Dataset, np.ndarray], test: tuple[Dataset, np.ndarray], reducers) -> list[dict]:
    """Fit every reducer on ``train``, regress on its output and score on ``test``."""
    d_tr, y_tr = train
    d_te, y_te = test
    if set(d_tr.column_names) != set(d_te.column_names):
        raise SchemaMismatchError(
            [c for c in d_tr.column_names if c not in d_te.column_names],
            [c for c in d_te.column_names if c not in d_tr.column_names],
        )
    y_tr = np.asarray(y_tr, dtype=float)
    y_te = np.asarray(y_te, dtype=float)
    table = []
    for red in reducers:
        try:
            red.fit(d_tr, y_tr)
            pred = fit_predict(red.transform(d_tr).values, y_tr, red.transform(d_te).values)
        except LinCFAError as exc:
            exc.args = (f"{red.name}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        mse, r2 = scores(y_te, pred)
        table.append({"method": red.name, "d": red.d, "r2": r2, "mse": mse})
    return table


def split_train_test(d: Dataset, y, test_fraction: float = 1 / 3, seed: int = 0):
    """Random row split; the test part gets ``round(n * test_fraction)`` rows."""
    if not 0 < test_fraction < 1:
        raise ConfigError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = np.asarray(y, dtype=float)
    perm = np.random.default_rng(seed).permutation(d.n)
    k = int(round(d.n * test_fraction))
    te, tr = np.sort(perm[:k]), np.sort(perm[k:])
    return (
        (Dataset(d.values[tr], d.column_names), y[tr]),
        (Dataset(d.values[te], d.column_names), y[te]),
    )
