"""Greedy feature partitioning and aggregation by group means.

The sweep visits features in column order. Each unconsumed feature seeds a new
group, and every later unconsumed feature whose pairwise decision against the
seed says "aggregate" joins that group. Membership is tested against the seed
only, never against the running group mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, SchemaMismatchError, SingularDesignError, ZeroVarianceError
from .linreg import SINGULAR_RTOL, LinearFit
from .stats import Dataset, StandardizationState, _negligible_spread, sample_correlation, standardize
from .thresholds import (
    AggregationDecision,
    Sentinel,
    ThresholdInputs,
    delta_bias_asymptotic,
    delta_var_asymptotic,
    satisfies,
    threshold_2d,
    threshold_conf_empirical,
    threshold_conf_theoretical,
)

MODES = ("theoretical", "empirical")
THRESHOLD_KINDS = ("asymptotic", "finite-equal", "conf-empirical", "conf-theoretical")

# Correlations this close to +1 aggregate without fitting the (singular) pair.
NEAR_PERFECT = 1e-10

GROUP_SEP = "+"


@dataclass(frozen=True)
class ReducerConfig:
    mode: str = "empirical"
    threshold_kind: str = "asymptotic"
    delta: float = 0.05
    known_weights: tuple[float, ...] | None = None
    known_sigma2: float | None = None
    standardize: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.threshold_kind not in THRESHOLD_KINDS:
            raise ConfigError(f"threshold_kind must be one of {THRESHOLD_KINDS}, got {self.threshold_kind!r}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.known_weights is not None:
            object.__setattr__(self, "known_weights", tuple(float(w) for w in self.known_weights))
        if self.mode == "theoretical":
            if self.known_weights is None or self.known_sigma2 is None:
                raise ConfigError("theoretical mode needs known_weights and known_sigma2")
            if not self.known_sigma2 >= 0:
                raise ConfigError("known_sigma2 must be >= 0")
            if self.threshold_kind == "conf-empirical":
                raise ConfigError("conf-empirical thresholds are built from fitted quantities; use empirical mode")
        else:
            if self.known_weights is not None or self.known_sigma2 is not None:
                raise ConfigError("empirical mode does not accept known_weights or known_sigma2")
            if self.threshold_kind == "conf-theoretical":
                raise ConfigError("conf-theoretical thresholds need the true model; use theoretical mode")

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["known_weights"] is not None:
            out["known_weights"] = list(out["known_weights"])
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "ReducerConfig":
        return cls(**payload)


@dataclass(frozen=True)
class Partition:
    groups: tuple[tuple[int, ...], ...]
    source_columns: tuple[str, ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        cols = tuple(self.source_columns)
        flat = [i for g in groups for i in g]
        if any(len(g) == 0 for g in groups):
            raise ConfigError("partition contains an empty group")
        if sorted(flat) != list(range(len(cols))):
            raise ConfigError(f"groups {groups} do not form a disjoint cover of {len(cols)} columns")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "source_columns", cols)

    @property
    def d(self) -> int:
        return len(self.groups)

    def members(self, k: int) -> tuple[str, ...]:
        return tuple(self.source_columns[i] for i in self.groups[k])

    @property
    def group_names(self) -> tuple[str, ...]:
        return tuple(GROUP_SEP.join(self.members(k)) for k in range(self.d))

    @classmethod
    def singletons(cls, columns: Sequence[str]) -> "Partition":
        return cls(tuple((i,) for i in range(len(columns))), tuple(columns))


# --------------------------------------------------------------------------
# Pairwise decisions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _PairMoments:
    """Second moments of a standardized pair and the centered target."""

    n: int
    v1: float
    v2: float
    c12: float
    b1: float  # x1 . y / (n-1)
    b2: float
    yy: float  # y . y / (n-1)

    @property
    def rho(self) -> float:
        return max(-1.0, min(1.0, self.c12 / math.sqrt(self.v1 * self.v2)))

    def fit(self) -> LinearFit:
        """Bivariate least squares from the moment matrix (same guard as ``ols_fit``)."""
        n = self.n
        m = n - 1
        gram = np.array([[self.v1, self.c12], [self.c12, self.v2]]) * m
        eig = np.linalg.eigvalsh(gram)
        if not eig[0] > SINGULAR_RTOL * eig[-1]:
            raise SingularDesignError("pair design is singular")
        det = gram[0, 0] * gram[1, 1] - gram[0, 1] ** 2
        inv = np.array([[gram[1, 1], -gram[0, 1]], [-gram[0, 1], gram[0, 0]]]) / det
        xy = np.array([self.b1, self.b2]) * m
        w = inv @ xy
        rss = max(self.yy * m - float(w @ xy), 0.0)
        s2 = rss / (n - 3)
        return LinearFit(weights=w, residual_variance=s2, weight_covariance=inv * s2, n=n, p=2)


def _moments_from_columns(x_i, x_j, y) -> _PairMoments:
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x_i.size
    xi = x_i - x_i.mean()
    xj = x_j - x_j.mean()
    yc = y - y.mean()
    m = n - 1
    return _PairMoments(
        n=n,
        v1=float(xi @ xi) / m,
        v2=float(xj @ xj) / m,
        c12=float(xi @ xj) / m,
        b1=float(xi @ yc) / m,
        b2=float(xj @ yc) / m,
        yy=float(yc @ yc) / m,
    )


def _decide(mom: _PairMoments, rho: float, cfg: ReducerConfig, i: int | None, j: int | None) -> AggregationDecision:
    n = mom.n
    if rho > 1 - NEAR_PERFECT:
        return AggregationDecision(rho, Sentinel.ALWAYS, True, None, None, "near-perfect")
    if rho < -1 + NEAR_PERFECT:
        # Averaging x and -x would give a constant column.
        return AggregationDecision(rho, Sentinel.NEVER, False, None, None, "near-perfect")

    if cfg.mode == "theoretical":
        if i is None or j is None:
            raise ConfigError("theoretical mode needs the column indices of the pair")
        w1, w2 = cfg.known_weights[i], cfg.known_weights[j]
        s2 = cfg.known_sigma2
        if cfg.threshold_kind == "conf-theoretical":
            thr = threshold_conf_theoretical(s2, 1.0, w1, w2, n, cfg.delta)
            return _scalar_decision(rho, thr, s2, n, w1, w2, "conf-theoretical")
        inputs = ThresholdInputs(s2, n, w1, w2, samp_var1=mom.v1, samp_var2=mom.v2, samp_cov=mom.c12, correlation=rho)
        return threshold_2d(inputs, "asymptotic" if cfg.threshold_kind == "asymptotic" else "finite-equal")

    fit = mom.fit()
    w1, w2 = (float(w) for w in fit.weights)
    s2 = fit.residual_variance
    if cfg.threshold_kind == "conf-empirical":
        thr = threshold_conf_empirical(fit, 0.5 * (mom.v1 + mom.v2), n, cfg.delta)
        return _scalar_decision(rho, thr, s2, n, w1, w2, "conf-empirical")
    inputs = ThresholdInputs(s2, n, w1, w2, samp_var1=mom.v1, samp_var2=mom.v2, samp_cov=mom.c12, correlation=rho)
    return threshold_2d(inputs, "empirical" if cfg.threshold_kind == "asymptotic" else "finite-equal")


def _scalar_decision(rho, thr, s2, n, w1, w2, mode) -> AggregationDecision:
    dv = delta_var_asymptotic(s2, n)
    db = delta_bias_asymptotic(w1, w2, 1.0, 1.0, rho)
    return AggregationDecision(rho, thr, satisfies(rho, thr), dv, db, mode, margin=dv - db)


def pairwise_decision(x_i, x_j, y, cfg: ReducerConfig, i: int | None = None, j: int | None = None) -> AggregationDecision:
    """Decide whether standardized columns ``x_i`` and ``x_j`` should be averaged.

    Empirical mode fits ``y`` (centered) on the pair and plugs the fitted
    weights and residual variance into the configured threshold. Theoretical
    mode reads ``known_weights[i]``, ``known_weights[j]`` and ``known_sigma2``.
    """
    x_i = np.asarray(x_i, dtype=float)
    if x_i.size < 5:
        raise ConfigError(f"pairwise decisions need n >= 5, got {x_i.size}")
    rho = sample_correlation(x_i, x_j, names=(str(i), str(j)))
    decision = _decide(_moments_from_columns(x_i, x_j, y), rho, cfg, i, j)
    return decision if i is None or j is None else decision.with_pair(i, j)


class _GramCache:
    """All pairwise moments of a dataset, computed once."""

    def __init__(self, values: np.ndarray, y: np.ndarray):
        n = values.shape[0]
        xc = values - values.mean(axis=0)
        yc = y - y.mean()
        m = n - 1
        self.n = n
        self.cov = xc.T @ xc / m
        self.xy = xc.T @ yc / m
        self.yy = float(yc @ yc) / m
        sd = np.sqrt(np.diag(self.cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            self.corr = np.clip(self.cov / np.outer(sd, sd), -1.0, 1.0)

    def pair(self, i: int, j: int) -> _PairMoments:
        return _PairMoments(
            self.n, self.cov[i, i], self.cov[j, j], self.cov[i, j], self.xy[i], self.xy[j], self.yy
        )


def build_partition(d: Dataset, y, cfg: ReducerConfig) -> tuple[Partition, list[AggregationDecision]]:
    """Run the greedy sweep on ``d`` (assumed already standardized)."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != d.n:
        raise ConfigError(f"target has {y.size} entries for {d.n} rows")
    if d.n < 5:
        raise ConfigError(f"pairwise decisions need n >= 5, got {d.n}")
    if cfg.mode == "theoretical" and len(cfg.known_weights) != d.D:
        raise ConfigError(f"{len(cfg.known_weights)} known weights for {d.D} columns")
    cache = _GramCache(d.values, y)
    scales = np.max(np.abs(d.values), axis=0)
    for j, var in enumerate(np.diag(cache.cov)):
        if _negligible_spread(math.sqrt(var), scales[j]):
            raise ZeroVarianceError(d.column_names[j])

    consumed = np.zeros(d.D, dtype=bool)
    groups: list[tuple[int, ...]] = []
    decisions: list[AggregationDecision] = []
    for i in range(d.D):
        if consumed[i]:
            continue
        consumed[i] = True
        group = [i]
        for j in range(i + 1, d.D):
            if consumed[j]:
                continue
            try:
                dec = _decide(cache.pair(i, j), float(cache.corr[i, j]), cfg, i, j).with_pair(i, j)
            except Exception as exc:
                names = (d.column_names[i], d.column_names[j])
                exc.args = (f"pair {names}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
                raise
            decisions.append(dec)
            if dec.aggregate:
                group.append(j)
                consumed[j] = True
        groups.append(tuple(group))
    return Partition(tuple(groups), d.column_names), decisions


def aggregate_partition(d: Dataset, p: Partition) -> Dataset:
    """Replace each group by the arithmetic mean of its columns."""
    if len(p.source_columns) != d.D:
        raise IndexError(f"partition covers {len(p.source_columns)} columns, dataset has {d.D}")
    cols = [d.values[:, list(g)].mean(axis=1) for g in p.groups]
    return Dataset(np.column_stack(cols), p.group_names)


@dataclass(frozen=True)
class FittedReducer:
    partition: Partition
    standardization: StandardizationState
    config: ReducerConfig
    decisions: tuple[AggregationDecision, ...] = field(default=(), compare=False)

    @property
    def d(self) -> int:
        return self.partition.d

    def transform(self, d_new: Dataset) -> Dataset:
        return transform(self, d_new)

    def to_dict(self) -> dict:
        return {
            "groups": [
                {"name": name, "members": list(self.partition.members(k))}
                for k, name in enumerate(self.partition.group_names)
            ],
            "standardization": self.standardization.to_dict(),
            "config": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, payload: dict) -> "FittedReducer":
        state = StandardizationState.from_dict(payload["standardization"])
        columns = state.column_names
        index = {c: k for k, c in enumerate(columns)}
        try:
            groups = tuple(tuple(index[m] for m in g["members"]) for g in payload["groups"])
        except KeyError as exc:
            raise SchemaMismatchError([], [str(exc.args[0])]) from None
        return cls(Partition(groups, columns), state, ReducerConfig.from_dict(payload["config"]))

    @classmethod
    def from_json(cls, text: str) -> "FittedReducer":
        return cls.from_dict(json.loads(text))


def _check_schema(expected: Sequence[str], got: Sequence[str]) -> None:
    missing = [c for c in expected if c not in got]
    extra = [c for c in got if c not in expected]
    if missing or extra:
        raise SchemaMismatchError(missing, extra)


def transform(r: FittedReducer, d_new: Dataset) -> Dataset:
    """Standardize with the stored training statistics, then aggregate."""
    _check_schema(r.partition.source_columns, d_new.column_names)
    return aggregate_partition(r.standardization.apply(d_new), r.partition)


def fit_transform(d: Dataset, y, cfg: ReducerConfig) -> tuple[FittedReducer, Dataset]:
    if cfg.standardize:
        z, state = standardize(d)
    else:
        z, state = d, StandardizationState.identity(d.column_names)
    partition, decisions = build_partition(z, y, cfg)
    fitted = FittedReducer(partition, state, cfg, tuple(decisions))
    return fitted, transform(fitted, d)
