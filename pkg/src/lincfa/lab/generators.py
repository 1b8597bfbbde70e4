"""Synthetic regression problems built from mixtures of uniform variables.

Every feature is a fixed linear combination of independent U[0, 1] draws, so
its population mean and covariance follow from the loading matrix alone:
``mean = 0.5 * L.sum(1)`` and ``cov = L L^T / 12``. By default features are
standardized with these population moments before the target is formed, which
puts the true weights on the unit-variance scale the thresholds assume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..stats import Dataset

SCENARIOS = ("bivariate", "trivariate", "ddim")

# Last entry of the seed key that selects what a substream is used for.
TRAIN, TEST, STRUCTURE = 0, 1, 2


def rep_rng(seed: int, arm: int, rep: int, purpose: int = TRAIN) -> np.random.Generator:
    """Independent stream for one repetition; never depends on scheduling."""
    return np.random.default_rng(np.random.SeedSequence([seed, arm, rep, purpose]))


@dataclass(frozen=True)
class GeneratorSpec:
    scenario: str = "bivariate"
    n: int = 500
    sigma: float = 1.0
    weights: tuple[float, ...] | None = None
    mix: float = 0.7
    D: int = 100
    seed: int = 0
    standardized: bool = True

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not self.sigma >= 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 <= self.mix <= 1:
            raise ConfigError(f"mix must lie in [0, 1], got {self.mix}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.scenario == "ddim" and self.D < 2:
            raise ConfigError(f"ddim needs D >= 2, got {self.D}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if not all(np.isfinite(w)):
                raise ConfigError("weights must be finite")
            object.__setattr__(self, "weights", w)
            if len(w) != self.feature_count:
                raise ConfigError(f"{self.scenario} needs {self.feature_count} weights, got {len(w)}")

    @property
    def feature_count(self) -> int:
        return {"bivariate": 2, "trivariate": 3}.get(self.scenario, self.D)


@dataclass(frozen=True)
class Structure:
    """Loadings, true weights and population moments of one generator draw."""

    loadings: np.ndarray  # D x K
    weights: np.ndarray
    sigma: float
    standardized: bool
    parents: tuple[int, ...] = field(default=())

    @property
    def D(self) -> int:
        return self.loadings.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"x{i + 1}" for i in range(self.D))

    @property
    def raw_mean(self) -> np.ndarray:
        return 0.5 * self.loadings.sum(axis=1)

    @property
    def raw_cov(self) -> np.ndarray:
        return self.loadings @ self.loadings.T / 12.0

    @property
    def raw_std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.raw_cov))

    @property
    def pop_corr(self) -> np.ndarray:
        sd = self.raw_std
        return self.raw_cov / np.outer(sd, sd)

    @property
    def pop_cov(self) -> np.ndarray:
        """Population covariance of the emitted features."""
        return self.pop_corr if self.standardized else self.raw_cov

    @property
    def sigma2(self) -> float:
        return self.sigma**2

    def features(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, self.loadings.shape[1]))
        x = u @ self.loadings.T
        if self.standardized:
            x = (x - self.raw_mean) / self.raw_std
        return x

    def sample(self, n: int, rng: np.random.Generator) -> tuple[Dataset, np.ndarray]:
        x = self.features(n, rng)
        noise = rng.standard_normal(n) * self.sigma
        return Dataset(x, self.names), x @ self.weights + noise

    def truth(self) -> dict:
        return {
            "weights": self.weights.copy(),
            "sigma2": self.sigma2,
            "pop_cov": self.pop_cov,
            "pop_corr": self.pop_corr,
            "parents": self.parents,
        }


def _bivariate_loadings(mix: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [mix, 1.0 - mix]])


def _trivariate_loadings() -> np.ndarray:
    x1 = np.array([1.0, 0.0, 0.0])
    x2 = 0.65 * x1 + np.array([0.0, 0.35, 0.0])
    x3 = 0.5 * x1 + 0.5 * x2 + np.array([0.0, 0.0, 0.5])
    return np.vstack([x1, x2, x3])


def _ddim_loadings(D: int, mix: float, rng: np.random.Generator) -> tuple[np.ndarray, tuple[int, ...]]:
    L = np.zeros((D, D))
    L[0, 0] = 1.0
    parents = [-1]
    for i in range(1, D):
        j = int(rng.integers(0, i))
        parents.append(j)
        L[i] = mix * L[j]
        L[i, i] = 1.0 - mix
    return L, tuple(parents)


DEFAULT_WEIGHTS = {"bivariate": (0.2, 0.8), "trivariate": (0.4, 0.6, 0.2)}


def build_structure(spec: GeneratorSpec, rng: np.random.Generator | None = None) -> Structure:
    """Fix everything except the samples themselves.

    For ``ddim`` the parent map and (absent explicit weights) the U[0, 1]
    weights are drawn from ``rng``, defaulting to a substream of ``spec.seed``.
    """
    parents: tuple[int, ...] = ()
    if spec.scenario == "bivariate":
        L = _bivariate_loadings(spec.mix)
        w = spec.weights or DEFAULT_WEIGHTS["bivariate"]
    elif spec.scenario == "trivariate":
        L = _trivariate_loadings()
        w = spec.weights or DEFAULT_WEIGHTS["trivariate"]
    else:
        rng = rng or rep_rng(spec.seed, 0, 0, STRUCTURE)
        L, parents = _ddim_loadings(spec.D, spec.mix, rng)
        w = spec.weights if spec.weights is not None else tuple(rng.random(spec.D))
    return Structure(L, np.asarray(w, dtype=float), spec.sigma, spec.standardized, parents)


def _generate(spec: GeneratorSpec, scenario: str):
    if spec.scenario != scenario:
        raise ConfigError(f"expected a {scenario} spec, got {spec.scenario!r}")
    s = build_structure(spec)
    d, y = s.sample(spec.n, rep_rng(spec.seed, 0, 0, TRAIN))
    return d, y, s.truth()


def gen_bivariate(spec: GeneratorSpec):
    """``x2 = mix * x1 + (1 - mix) * u``; ``y = w1 x1 + w2 x2 + noise``."""
    return _generate(spec, "bivariate")


def gen_trivariate(spec: GeneratorSpec):
    """``x2 = 0.65 x1 + 0.35 u``, ``x3 = 0.5 x1 + 0.5 x2 + 0.5 u'``."""
    return _generate(spec, "trivariate")


def gen_ddim(spec: GeneratorSpec):
    """Each feature mixes a uniformly chosen earlier feature with fresh noise."""
    return _generate(spec, "ddim")
