"""Upper-tail critical values of the chi-squared and F distributions.

``q = chi2_upper_quantile(k, alpha)`` satisfies ``P(X >= q) = alpha``. Both
functions invert the regularized incomplete gamma/beta survival function on
an expanding bracket.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq
from scipy.special import betainc, gammaincc

from .errors import QuantileDomainError

_XTOL = 1e-300
_RTOL = 1e-13


def _check(alpha: float, *dfs: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise QuantileDomainError(f"alpha must lie in (0, 1), got {alpha}")
    for df in dfs:
        if not (df >= 1 and math.isfinite(df)):
            raise QuantileDomainError(f"degrees of freedom must be >= 1, got {df}")


def _invert_survival(sf, alpha: float, start: float) -> float:
    hi = max(start, 1.0)
    while sf(hi) > alpha:
        hi *= 2.0
        if hi > 1e300:
            raise QuantileDomainError("failed to bracket the quantile")
    lo = 0.0
    return brentq(lambda x: sf(x) - alpha, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=500)


def chi2_upper_quantile(df: float, alpha: float) -> float:
    _check(alpha, df)
    half = 0.5 * df
    return _invert_survival(lambda x: gammaincc(half, 0.5 * x), alpha, start=df)


def f_upper_quantile(df1: float, df2: float, alpha: float) -> float:
    _check(alpha, df1, df2)

    def sf(x: float) -> float:
        return betainc(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * x))

    return _invert_survival(sf, alpha, start=2.0)
