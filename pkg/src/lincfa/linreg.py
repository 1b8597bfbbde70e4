"""Intercept-free least squares and the bivariate closed forms.

Features are assumed centered (zero population mean), so no intercept is
fitted. The closed forms below are the per-pair variance and bias
expressions used both by the threshold engine and as oracles in the
Monte Carlo lab; ``s*`` arguments are sample moments (n-1 divisor) and
``pop_*`` arguments the corresponding population moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    CollinearityError,
    DegenerateSampleError,
    InconsistencyError,
    InsufficientSamplesError,
    SingularDesignError,
)

# Smallest eigenvalue of X^T X relative to the largest before the design is
# declared singular.
SINGULAR_RTOL = 1e-10

# Negative round-off tolerated (relative to the magnitude of the summed
# terms) before a bias/variance expression is treated as inconsistent.
NEGATIVE_RTOL = 1e-12


def clamp_nonnegative(value: float, scale: float = 1.0, what: str = "quantity") -> float:
    if value >= 0.0:
        return value
    if value >= -NEGATIVE_RTOL * max(1.0, abs(scale)):
        return 0.0
    raise InconsistencyError(f"{what} is negative ({value:.3e}) beyond round-off")


@dataclass(frozen=True)
class LinearFit:
    weights: np.ndarray
    residual_variance: float
    weight_covariance: np.ndarray
    n: int
    p: int

    @property
    def weight_sd(self) -> np.ndarray:
        return np.sqrt(np.diag(self.weight_covariance))

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return X @ self.weights


def ols_fit(X, y) -> LinearFit:
    """Fit ``y ~ X w`` without intercept.

    The residual variance uses the divisor ``n - p - 1``.

    Raises
    ------
    InsufficientSamplesError
        If ``n <= p + 1``.
    SingularDesignError
        If the smallest eigenvalue of ``X^T X`` is below ``1e-10`` times the
        largest.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.size != n:
        raise DegenerateSampleError(f"X has {n} rows but y has {y.size} entries")
    if n <= p + 1:
        raise InsufficientSamplesError(f"need n > p + 1 samples, got n={n}, p={p}")

    gram = X.T @ X
    eig = np.linalg.eigvalsh(gram)
    if not eig[0] > SINGULAR_RTOL * eig[-1]:
        raise SingularDesignError(
            f"X^T X is singular: eigenvalue ratio {eig[0] / eig[-1] if eig[-1] > 0 else 0.0:.3e}"
        )
    factor = cho_factor(gram, lower=True)
    weights = cho_solve(factor, X.T @ y)
    resid = y - X @ weights
    s2 = float(resid @ resid) / (n - p - 1)
    gram_inv = cho_solve(factor, np.eye(p))
    gram_inv = 0.5 * (gram_inv + gram_inv.T)
    return LinearFit(weights=weights, residual_variance=s2, weight_covariance=gram_inv * s2, n=n, p=p)


def weight_variance_1d(sigma2: float, sample_var_xbar: float, n: int) -> float:
    """Variance of the slope on the averaged feature, ``s2 / ((n-1) var(xbar))``."""
    if not sample_var_xbar > 0:
        raise DegenerateSampleError("sample variance of the averaged feature must be positive")
    return sigma2 / ((n - 1) * sample_var_xbar)


def weight_covariance_2d(sigma2: float, var1: float, var2: float, cov12: float, n: int) -> np.ndarray:
    det = var1 * var2 - cov12 * cov12
    if not det > 0:
        raise CollinearityError(f"sample moment determinant {det:.3e} is not positive")
    adj = np.array([[var2, -cov12], [-cov12, var1]])
    return sigma2 / ((n - 1) * det) * adj


def expected_weight_1d(w1: float, w2: float, var1: float, var2: float, cov12: float) -> float:
    """Expected slope on ``(x1 + x2) / 2`` given the training features."""
    sum_var = var1 + var2 + 2 * cov12
    if not sum_var > 0:
        raise DegenerateSampleError("sample variance of x1 + x2 is zero")
    return 2 * (w1 * var1 + w2 * var2 + (w1 + w2) * cov12) / sum_var


def model_variance_1d(sigma2: float, pop_var_sum: float, samp_var_sum: float, n: int) -> float:
    if not samp_var_sum > 0:
        raise DegenerateSampleError("sample variance of x1 + x2 must be positive")
    return pop_var_sum * sigma2 / ((n - 1) * samp_var_sum)


def model_variance_2d(
    sigma2: float,
    pop_var1: float,
    pop_var2: float,
    pop_cov: float,
    samp_var1: float,
    samp_var2: float,
    samp_cov: float,
    n: int,
) -> float:
    det = samp_var1 * samp_var2 - samp_cov * samp_cov
    if not det > 0:
        raise CollinearityError(f"sample moment determinant {det:.3e} is not positive")
    num = pop_var1 * samp_var2 + pop_var2 * samp_var1 - 2 * pop_cov * samp_cov
    return sigma2 * num / ((n - 1) * det)


def model_bias_1d(
    w1: float,
    w2: float,
    pop_var1: float,
    pop_var2: float,
    pop_cov: float,
    samp_var1: float,
    samp_var2: float,
    samp_cov: float,
) -> float:
    """Squared bias of the averaged-feature model given the training moments.

    The bivariate model is unbiased, so this is also the bias increase caused
    by the aggregation.
    """
    samp_sum = samp_var1 + samp_var2 + 2 * samp_cov
    if not samp_sum > 0:
        raise DegenerateSampleError("sample variance of x1 + x2 is zero")
    pop_sum = pop_var1 + pop_var2 + 2 * pop_cov
    samp_proj = w1 * samp_var1 + w2 * samp_var2 + (w1 + w2) * samp_cov
    pop_proj = w1 * pop_var1 + w2 * pop_var2 + (w1 + w2) * pop_cov
    signal = w1 * w1 * pop_var1 + w2 * w2 * pop_var2 + 2 * w1 * w2 * pop_cov
    first = pop_sum / samp_sum**2 * samp_proj**2
    cross = 2.0 / samp_sum * pop_proj * samp_proj
    value = first + signal - cross
    return clamp_nonnegative(value, scale=max(abs(first), abs(signal), abs(cross)), what="bias")
