"""Sample-moment kernels and standardization.

All variances and covariances use the n-1 divisor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateSampleError, LengthMismatchError, LinCFAError, ZeroVarianceError


@dataclass(frozen=True)
class Dataset:
    """Column-named numeric matrix (n samples by D features)."""

    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise LinCFAError(f"dataset values must be 2-D, got shape {values.shape}")
        names = tuple(str(c) for c in self.column_names)
        if len(names) != values.shape[1]:
            raise LinCFAError(f"{len(names)} column names for {values.shape[1]} columns")
        if len(set(names)) != len(names):
            raise LinCFAError(f"duplicate column names in {names}")
        if values.shape[1] < 1:
            raise LinCFAError("dataset needs at least one column")
        if values.shape[0] < 2:
            raise DegenerateSampleError(f"dataset needs n >= 2 rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise LinCFAError("dataset contains non-finite entries")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)

    @classmethod
    def from_columns(cls, columns: dict[str, Sequence[float]]) -> "Dataset":
        names = list(columns)
        return cls(np.column_stack([np.asarray(columns[c], dtype=float) for c in names]), tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    def column(self, j: int | str) -> np.ndarray:
        if isinstance(j, str):
            j = self.column_names.index(j)
        return self.values[:, j]

    def select(self, names: Sequence[str]) -> "Dataset":
        """Return the columns ``names`` in that order."""
        idx = [self.column_names.index(c) for c in names]
        return Dataset(self.values[:, idx], tuple(names))


@dataclass(frozen=True)
class StandardizationState:
    """Per-column means and sample standard deviations of the fit data."""

    column_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray

    def apply(self, d: Dataset) -> Dataset:
        aligned = d.select(self.column_names)
        return Dataset((aligned.values - self.means) / self.stds, self.column_names)

    def to_dict(self) -> dict:
        return {
            c: {"mean": float(m), "std": float(s)}
            for c, m, s in zip(self.column_names, self.means, self.stds)
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "StandardizationState":
        names = tuple(payload)
        means = np.array([payload[c]["mean"] for c in names], dtype=float)
        stds = np.array([payload[c]["std"] for c in names], dtype=float)
        return cls(names, means, stds)

    @classmethod
    def identity(cls, column_names: Sequence[str]) -> "StandardizationState":
        k = len(column_names)
        return cls(tuple(column_names), np.zeros(k), np.ones(k))


# Relative tolerance below which a column counts as constant; absorbs the
# round-off of the mean for columns like [0.1, 0.1, 0.1].
_CONSTANT_RTOL = 1e-12


def _negligible_spread(std: float, scale: float) -> bool:
    return not std > _CONSTANT_RTOL * max(1.0, scale)


def _as_column(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise LinCFAError(f"expected a 1-D column, got shape {a.shape}")
    return a


def sample_covariance(a, b) -> float:
    a = _as_column(a)
    b = _as_column(b)
    if a.shape != b.shape:
        raise LengthMismatchError(f"columns of length {a.size} and {b.size}")
    n = a.size
    if n < 2:
        raise DegenerateSampleError(f"need n >= 2 samples, got {n}")
    da = a - a.mean()
    db = b - b.mean()
    return float(np.dot(da, db) / (n - 1))


def column_moments(d: Dataset, j: int) -> tuple[float, float]:
    """Mean and (n-1)-divisor variance of column ``j``."""
    if not 0 <= j < d.D:
        raise IndexError(f"column index {j} out of range for D={d.D}")
    x = d.values[:, j]
    return float(x.mean()), sample_covariance(x, x)


def sample_correlation(a, b, names: tuple[str, str] = ("a", "b")) -> float:
    """Pearson correlation, clamped to [-1, 1]."""
    a = _as_column(a)
    b = _as_column(b)
    va = sample_covariance(a, a)
    vb = sample_covariance(b, b)
    if _negligible_spread(np.sqrt(va), float(np.max(np.abs(a)))):
        raise ZeroVarianceError(names[0])
    if _negligible_spread(np.sqrt(vb), float(np.max(np.abs(b)))):
        raise ZeroVarianceError(names[1])
    r = sample_covariance(a, b) / np.sqrt(va * vb)
    return float(min(1.0, max(-1.0, r)))


def covariance_matrix(values: np.ndarray) -> np.ndarray:
    """D x D sample covariance matrix of the columns of ``values``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise DegenerateSampleError(f"need n >= 2 samples, got {n}")
    centered = values - values.mean(axis=0)
    return centered.T @ centered / (n - 1)


def correlation_matrix(values: np.ndarray) -> np.ndarray:
    cov = covariance_matrix(values)
    sd = np.sqrt(np.diag(cov))
    if np.any(sd <= 0):
        raise ZeroVarianceError(int(np.flatnonzero(sd <= 0)[0]))
    corr = cov / np.outer(sd, sd)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return corr


def standardize(d: Dataset) -> tuple[Dataset, StandardizationState]:
    """Rescale every column to sample mean 0 and sample variance 1."""
    means = d.values.mean(axis=0)
    centered = d.values - means
    stds = np.sqrt(np.einsum("ij,ij->j", centered, centered) / (d.n - 1))
    scales = np.max(np.abs(d.values), axis=0)
    for j, s in enumerate(stds):
        if _negligible_spread(s, scales[j]):
            raise ZeroVarianceError(d.column_names[j])
    state = StandardizationState(d.column_names, means, stds)
    return state.apply(d), state
