"""Monte Carlo estimate of the bias-variance decomposition of a linear model.

Each repetition draws a fresh training set, fits the model and records its
coefficient vector in the original feature space. With the test set held
fixed, variance and squared bias are quadratic forms in those coefficients
against the test second-moment matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, InsufficientRepetitionsError
from ..linreg import ols_fit
from .generators import TEST, TRAIN, GeneratorSpec, build_structure, rep_rng

MIN_REPS = 100


def aggregation_matrix(groups, D: int) -> np.ndarray:
    """D x d matrix whose column k averages the features of group k."""
    A = np.zeros((D, len(groups)))
    for k, g in enumerate(groups):
        A[list(g), k] = 1.0 / len(g)
    return A


def model_groups(model: str, D: int, groups=None):
    if model == "full":
        return tuple((i,) for i in range(D))
    if model == "aggregated-pair":
        return ((0, 1),) + tuple((i,) for i in range(2, D))
    if model == "reduced":
        if groups is None:
            raise ConfigError("the reduced model needs explicit groups")
        return tuple(tuple(g) for g in groups)
    raise ConfigError(f"unknown model {model!r}")


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.se


@dataclass(frozen=True)
class MonteCarloReport:
    mse: Estimate
    bias2: Estimate
    variance: Estimate
    noise: Estimate
    repetitions: int
    metadata: dict = field(default_factory=dict)
    rep_variance: np.ndarray = field(default=None, repr=False, compare=False)
    test_variance: np.ndarray = field(default=None, repr=False, compare=False)
    # Mean squared noise actually drawn on the frozen test set, and the
    # standard error of the pointwise decomposition residual.
    realized_noise: float = field(default=float("nan"), compare=False)
    gap_se: float = field(default=float("nan"), compare=False)

    @property
    def decomposition_gap(self) -> float:
        return self.mse.value - (self.bias2.value + self.variance.value + self.realized_noise)

    @property
    def decomposition_se(self) -> float:
        return self.gap_se

    @property
    def self_check(self) -> bool:
        return abs(self.decomposition_gap) <= 3 * self.decomposition_se

    def row(self) -> dict:
        out = dict(self.metadata)
        for name in ("mse", "bias2", "variance", "noise"):
            est = getattr(self, name)
            out[name] = est.value
            out[f"{name}_se"] = est.se
        out["repetitions"] = self.repetitions
        out["self_check"] = self.self_check
        return out


def _fit_coefficients(spec: GeneratorSpec, structure, A: np.ndarray, arm: int, rep: int) -> np.ndarray:
    d, y = structure.sample(spec.n, rep_rng(spec.seed, arm, rep, TRAIN))
    fit = ols_fit(d.values @ A, y)
    return A @ fit.weights


def monte_carlo_bias_variance(
    spec: GeneratorSpec,
    model: str = "full",
    reps: int = 1000,
    *,
    groups=None,
    arm: int = 0,
    test_n: int | None = None,
    workers: int = 1,
) -> MonteCarloReport:
    """Estimate MSE, squared bias, variance and noise of ``model`` under ``spec``.

    ``model`` is ``full``, ``aggregated-pair`` (average the first two features)
    or ``reduced`` with explicit ``groups``. Training sets for repetition ``r``
    depend only on ``(spec.seed, arm, r)``, so reports for different models of
    the same arm are paired draw by draw.
    """
    if reps < MIN_REPS:
        raise InsufficientRepetitionsError(f"need at least {MIN_REPS} repetitions, got {reps}")
    structure = build_structure(spec)
    D = structure.D
    A = aggregation_matrix(model_groups(model, D, groups), D)

    test_rng = rep_rng(spec.seed, arm, 0, TEST)
    T = test_n or spec.n
    z_test = structure.features(T, test_rng)
    f_star = z_test @ structure.weights
    y_test = f_star + test_rng.standard_normal(T) * structure.sigma

    def one(r):
        return _fit_coefficients(spec, structure, A, arm, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            betas = np.array(list(pool.map(one, range(reps))))
    else:
        betas = np.array([one(r) for r in range(reps)])

    R = reps
    preds = betas @ z_test.T  # R x T
    beta_bar = betas.mean(axis=0)
    dev = betas - beta_bar
    S = z_test.T @ z_test / T

    # Variance: per-rep contributions (unbiased over reps) and per-test-point view.
    rep_var = np.einsum("rd,de,re->r", dev, S, dev) * R / (R - 1)
    pred_dev = preds - preds.mean(axis=0)
    test_var = (pred_dev**2).sum(axis=0) / (R - 1)
    variance = float(rep_var.mean())
    var_se = math.sqrt(rep_var.var(ddof=1) / R + test_var.var(ddof=1) / T)

    # Squared bias, corrected for the noise in the mean prediction.
    u = beta_bar - structure.weights
    test_bias = (z_test @ u) ** 2 - test_var / R
    bias2 = float(u @ S @ u) - variance / R
    C = np.cov(betas, rowvar=False, ddof=1).reshape(D, D) / R
    SC = S @ C
    rep_bias_var = max(4.0 * float(u @ SC @ S @ u) + 2.0 * float(np.trace(SC @ SC)), 0.0)
    bias_se = math.sqrt(rep_bias_var + test_bias.var(ddof=1) / T)

    # MSE on the noisy test targets.
    sq = (y_test[None, :] - preds) ** 2
    rep_mse = sq.mean(axis=1)
    point_mse = sq.mean(axis=0)
    mse = float(rep_mse.mean())
    mse_se = math.sqrt(rep_mse.var(ddof=1) / R + point_mse.var(ddof=1) / T)

    # The test noise is shared by every repetition, so the decomposition is
    # checked against its realized level; what remains is the cross term
    # between noise and prediction error plus Monte Carlo error.
    eps2 = (y_test - f_star) ** 2
    realized = float(eps2.mean())
    point_gap = point_mse - eps2 - ((z_test @ u) ** 2 + test_var * (R - 1) / R)
    gap_se = math.sqrt(
        rep_mse.var(ddof=1) / R + point_gap.var(ddof=1) / T + bias_se**2 + var_se**2
    )

    noise = structure.sigma2
    return MonteCarloReport(
        mse=Estimate(mse, mse_se),
        bias2=Estimate(bias2, bias_se),
        variance=Estimate(variance, var_se),
        noise=Estimate(noise, 0.0),
        repetitions=R,
        metadata={"scenario": spec.scenario, "model": model, "n": spec.n, "sigma": spec.sigma, "test_n": T},
        rep_variance=rep_var,
        test_variance=test_var,
        realized_noise=realized,
        gap_se=gap_se,
    )


def variance_difference(a: MonteCarloReport, b: MonteCarloReport) -> Estimate:
    """Paired estimate of ``variance(a) - variance(b)`` for reports on the same draws."""
    if a.repetitions != b.repetitions:
        raise ConfigError("reports must share their repetitions")
    d_rep = a.rep_variance - b.rep_variance
    d_test = a.test_variance - b.test_variance
    se = math.sqrt(d_rep.var(ddof=1) / d_rep.size + d_test.var(ddof=1) / d_test.size)
    return Estimate(float(d_rep.mean()), se)
