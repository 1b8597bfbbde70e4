"""Principal component baseline used in comparison tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LinCFAError
from .stats import Dataset, covariance_matrix


@dataclass(frozen=True)
class PcaModel:
    components: np.ndarray  # retained x D, orthonormal rows
    eigenvalues: np.ndarray  # all D, nonincreasing
    retained: int
    variance_fraction: float
    column_names: tuple[str, ...]
    means: np.ndarray

    @property
    def explained_fraction(self) -> float:
        total = self.eigenvalues.sum()
        return float(self.eigenvalues[: self.retained].sum() / total) if total > 0 else 1.0


def pca_fit(d: Dataset, variance_fraction: float = 0.95) -> PcaModel:
    """Keep the fewest leading components whose eigenvalues reach ``variance_fraction`` of the total."""
    if not 0 < variance_fraction <= 1:
        raise ConfigError(f"variance_fraction must lie in (0, 1], got {variance_fraction}")
    if not np.all(np.isfinite(d.values)):
        raise LinCFAError("PCA input contains non-finite values")
    cov = covariance_matrix(d.values)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order].T
    # Largest-magnitude entry of each component is positive.
    pivots = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(len(vecs)), pivots])
    vecs = vecs * signs[:, None]

    total = vals.sum()
    if total <= 0:
        retained = 1
    else:
        cum = np.cumsum(vals) / total
        # Round-off guard so a fraction of exactly 1.0 stops at the true rank.
        retained = int(np.searchsorted(cum, variance_fraction - 1e-12) + 1)
        retained = min(retained, len(vals))
    return PcaModel(vecs[:retained].copy(), vals, retained, variance_fraction, d.column_names, d.values.mean(axis=0))


def pca_transform(m: PcaModel, d: Dataset) -> Dataset:
    aligned = d.select(m.column_names)
    scores = (aligned.values - m.means) @ m.components.T
    return Dataset(scores, tuple(f"pc{k + 1}" for k in range(m.retained)))
