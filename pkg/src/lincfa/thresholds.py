"""Aggregation thresholds: when does averaging two features not hurt MSE?

Averaging ``x1`` and ``x2`` removes one coefficient from a linear model. That
lowers the model variance by ``delta_var`` and raises the squared bias by
``delta_bias``; the pair should be averaged iff ``delta_var >= delta_bias``.
Each function here turns one version of that inequality (asymptotic,
finite-sample, three-feature, confidence-bounded) into a condition on the
correlation of the pair.

Unless stated otherwise the features are assumed to have unit variance and
the weights ``w1, w2`` are expressed on that scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    CollinearityError,
    ConfigError,
    DegenerateSampleError,
    MissingMomentError,
)
from .linreg import LinearFit, clamp_nonnegative
from .quantiles import chi2_upper_quantile, f_upper_quantile

# Squared weight gaps below this are treated as equal weights.
EQUAL_WEIGHTS_TOL = 1e-12

# Variances within this distance of 1 select the unit-variance formulas.
UNIT_TOL = 1e-9


class Sentinel(str, Enum):
    ALWAYS = "always"
    NEVER = "never"


@dataclass(frozen=True)
class ThresholdInputs:
    """Everything a threshold formula may need for one candidate pair.

    ``sigma2`` and ``w1``/``w2`` are either the true noise variance and
    coefficients or their estimates (``s2`` and fitted weights), depending on
    the caller. ``correlation`` defaults to the one implied by the sample
    moments.
    """

    sigma2: float
    n: int
    w1: float
    w2: float
    samp_var1: float | None = None
    samp_var2: float | None = None
    samp_cov: float | None = None
    pop_var1: float | None = None
    pop_var2: float | None = None
    pop_cov: float | None = None
    w3: float | None = None
    rho13: float | None = None
    rho23: float | None = None
    sigma_x3: float = 1.0
    delta: float = 0.05
    correlation: float | None = None

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ConfigError(f"sigma2 must be >= 0, got {self.sigma2}")
        if self.n < 4:
            raise DegenerateSampleError(f"need n >= 4, got {self.n}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        for name in ("samp_var1", "samp_var2", "pop_var1", "pop_var2"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DegenerateSampleError(f"{name} must be positive, got {v}")

    @property
    def rho_hat(self) -> float:
        if self.correlation is not None:
            return self.correlation
        if None in (self.samp_var1, self.samp_var2, self.samp_cov):
            raise MissingMomentError("need the pair correlation or its sample moments")
        r = self.samp_cov / math.sqrt(self.samp_var1 * self.samp_var2)
        return min(1.0, max(-1.0, r))

    @property
    def pop_rho(self) -> float | None:
        if self.pop_cov is None:
            return None
        v1 = 1.0 if self.pop_var1 is None else self.pop_var1
        v2 = 1.0 if self.pop_var2 is None else self.pop_var2
        return self.pop_cov / math.sqrt(v1 * v2)

    @property
    def weight_gap2(self) -> float:
        return (self.w1 - self.w2) ** 2


@dataclass(frozen=True)
class AggregationDecision:
    """Verdict for one pair.

    ``threshold`` is a float (aggregate iff ``correlation >= threshold``, or
    ``correlation**2 >= threshold`` when ``squared``), a ``(lower, upper)``
    interval, a :class:`Sentinel`, or ``None`` when the verdict comes from the
    sign of ``margin`` alone.
    """

    correlation: float
    threshold: float | tuple[float, float] | Sentinel | None
    aggregate: bool
    delta_var: float | None
    delta_bias: float | None
    mode: str
    squared: bool = False
    margin: float | None = None
    pair: tuple[int, int] | None = None

    def with_pair(self, i: int, j: int) -> "AggregationDecision":
        return replace(self, pair=(i, j))

    def threshold_text(self) -> str:
        t = self.threshold
        if isinstance(t, Sentinel):
            return t.value
        if t is None:
            return f"margin={self.margin:.6g}"
        if isinstance(t, tuple):
            return f"[{t[0]:.6f}, {t[1]:.6f}]"
        return f"{t:.6f}" + (" (rho^2)" if self.squared else "")


def satisfies(correlation: float, threshold, squared: bool = False) -> bool:
    if isinstance(threshold, Sentinel):
        return threshold is Sentinel.ALWAYS
    if isinstance(threshold, tuple):
        lo, hi = threshold
        return lo <= correlation <= hi
    value = correlation * correlation if squared else correlation
    return value >= threshold


# --------------------------------------------------------------------------
# Variance and bias differences
# --------------------------------------------------------------------------


def delta_var_asymptotic(sigma2: float, n: int) -> float:
    if n < 2:
        raise DegenerateSampleError(f"need n >= 2, got {n}")
    return sigma2 / (n - 1)


def delta_var_finite_equal(
    sigma2: float, n: int, pop_var: float, samp_var: float, pop_rho: float, samp_rho: float
) -> float:
    if not samp_var > 0:
        raise DegenerateSampleError("sample variance must be positive")
    if samp_rho >= 1.0:
        raise DegenerateSampleError("sample correlation is 1; variance difference undefined")
    value = sigma2 / (n - 1) * (pop_var * (1 - pop_rho)) / (samp_var * (1 - samp_rho))
    return clamp_nonnegative(value, what="variance difference")


def delta_bias_asymptotic(w1: float, w2: float, pop_var1: float, pop_var2: float, pop_rho: float) -> float:
    s1 = math.sqrt(pop_var1)
    s2 = math.sqrt(pop_var2)
    var_sum = pop_var1 + pop_var2 + 2 * pop_rho * s1 * s2
    if not var_sum > 0:
        raise DegenerateSampleError("variance of x1 + x2 is zero")
    if pop_var1 == 1.0 and pop_var2 == 1.0:
        return clamp_nonnegative((1 - pop_rho) * (w1 - w2) ** 2 / 2, what="bias difference")
    value = pop_var1 * pop_var2 * (1 - pop_rho**2) * (w1 - w2) ** 2 / var_sum
    return clamp_nonnegative(value, what="bias difference")


def delta_bias_finite_equal(w1: float, w2: float, pop_var: float, pop_rho: float) -> float:
    if not pop_var > 0:
        raise DegenerateSampleError("population variance must be positive")
    return clamp_nonnegative(pop_var * (1 - pop_rho) * (w1 - w2) ** 2 / 2, what="bias difference")


def delta_var_general(sigma2: float, n: int, samp_var1: float, samp_var2: float, samp_cov: float, pop_rho: float) -> float:
    """Variance reduction for unit population variances and arbitrary sample moments."""
    det = samp_var1 * samp_var2 - samp_cov**2
    if not det > 0:
        raise CollinearityError(f"sample moment determinant {det:.3e} is not positive")
    s_sum = samp_var1 + samp_var2 + 2 * samp_cov
    num = (samp_var1 - samp_var2) ** 2 + 2 * (1 - pop_rho) * (samp_var1 + samp_cov) * (samp_var2 + samp_cov)
    value = sigma2 / (n - 1) * num / (det * s_sum)
    return clamp_nonnegative(value, what="variance difference")


def delta_bias_general(w1: float, w2: float, samp_var1: float, samp_var2: float, samp_cov: float, pop_rho: float) -> float:
    s_sum = samp_var1 + samp_var2 + 2 * samp_cov
    if not s_sum > 0:
        raise DegenerateSampleError("sample variance of x1 + x2 is zero")
    num = (
        2 * (1 - pop_rho) * (samp_var1 + samp_var2 + samp_cov) * samp_cov
        + samp_var1**2
        + samp_var2**2
        - 2 * pop_rho * samp_var1 * samp_var2
    )
    value = num * (w1 - w2) ** 2 / s_sum**2
    return clamp_nonnegative(value, scale=max(samp_var1, samp_var2) ** 2 * (w1 - w2) ** 2, what="bias difference")


def delta_bias_3d(
    w1: float, w2: float, w3: float, rho12: float, rho13: float, rho23: float, sigma_x3: float = 1.0
) -> float:
    """Bias increase from averaging x1, x2 when a third feature x3 stays in the model."""
    gap = rho13 - rho23
    if rho12 >= 1.0:
        if abs(gap) <= 1e-15:
            return 0.0
        raise DegenerateSampleError("rho12 = 1 with rho13 != rho23: bias difference diverges")
    first = 0.5 * (1 - rho12) * (w1 - w2) ** 2
    second = sigma_x3 * w3 * (w1 - w2) * gap
    third = w3**2 * sigma_x3**2 * gap**2 / (2 * (1 - rho12))
    return clamp_nonnegative(first + second + third, scale=max(first, abs(second), third), what="3D bias difference")


# --------------------------------------------------------------------------
# Two-feature thresholds
# --------------------------------------------------------------------------


def unit_variance_threshold(sigma2: float, n: int, w1: float, w2: float, var_x: float = 1.0) -> float | Sentinel:
    """``1 - 2 sigma2 / ((n-1) var_x (w1-w2)^2)``, or ALWAYS for equal weights."""
    gap2 = (w1 - w2) ** 2
    if gap2 < EQUAL_WEIGHTS_TOL:
        return Sentinel.ALWAYS
    return 1.0 - 2.0 * sigma2 / ((n - 1) * var_x * gap2)


def _is_unit(*variances: float | None) -> bool:
    return all(v is None or abs(v - 1.0) <= UNIT_TOL for v in variances)


def _general_threshold(sigma2, n, w1, w2, var1, var2, cov) -> float | Sentinel:
    gap2 = (w1 - w2) ** 2
    if gap2 < EQUAL_WEIGHTS_TOL:
        return Sentinel.ALWAYS
    var_sum = var1 + var2 + 2 * cov
    return 1.0 - sigma2 * var_sum / ((n - 1) * var1 * var2 * gap2)


def threshold_2d(inputs: ThresholdInputs, mode: str = "asymptotic") -> AggregationDecision:
    """Two-feature decision under one of three modes.

    ``asymptotic``
        True (or plug-in) ``sigma2`` and weights with population moments;
        unit population variances unless ``pop_var1``/``pop_var2`` say
        otherwise, in which case the squared-correlation form is used.
    ``finite-equal``
        Equal variances and equal sample variances; the pooled sample variance
        of the pair scales the threshold.
    ``empirical``
        ``sigma2`` is the residual variance estimate and ``w1, w2`` the fitted
        weights; unit sample variances select the linear form, otherwise the
        squared form on sample moments.
    """
    rho = inputs.rho_hat
    n = inputs.n
    dv = delta_var_asymptotic(inputs.sigma2, n)

    if mode == "asymptotic":
        if _is_unit(inputs.pop_var1, inputs.pop_var2):
            thr = unit_variance_threshold(inputs.sigma2, n, inputs.w1, inputs.w2)
            squared = False
            pop_rho = inputs.pop_rho if inputs.pop_rho is not None else rho
            db = delta_bias_asymptotic(inputs.w1, inputs.w2, 1.0, 1.0, pop_rho)
        else:
            if None in (inputs.pop_var1, inputs.pop_var2, inputs.pop_cov):
                raise MissingMomentError("general asymptotic threshold needs pop_var1, pop_var2 and pop_cov")
            thr = _general_threshold(
                inputs.sigma2, n, inputs.w1, inputs.w2, inputs.pop_var1, inputs.pop_var2, inputs.pop_cov
            )
            squared = True
            db = delta_bias_asymptotic(inputs.w1, inputs.w2, inputs.pop_var1, inputs.pop_var2, inputs.pop_rho)
    elif mode == "finite-equal":
        if inputs.samp_var1 is None or inputs.samp_var2 is None:
            raise MissingMomentError("finite-equal threshold needs samp_var1 and samp_var2")
        samp_var = 0.5 * (inputs.samp_var1 + inputs.samp_var2)
        if inputs.pop_var1 is not None and inputs.pop_var2 is not None:
            pop_var = 0.5 * (inputs.pop_var1 + inputs.pop_var2)
        else:
            pop_var = samp_var
        pop_rho = inputs.pop_rho if inputs.pop_rho is not None else rho
        thr = unit_variance_threshold(inputs.sigma2, n, inputs.w1, inputs.w2, var_x=samp_var)
        squared = False
        dv = delta_var_finite_equal(inputs.sigma2, n, pop_var, samp_var, pop_rho, rho) if rho < 1 else math.inf
        db = delta_bias_finite_equal(inputs.w1, inputs.w2, pop_var, pop_rho)
    elif mode == "empirical":
        if _is_unit(inputs.samp_var1, inputs.samp_var2):
            thr = unit_variance_threshold(inputs.sigma2, n, inputs.w1, inputs.w2)
            squared = False
            db = delta_bias_asymptotic(inputs.w1, inputs.w2, 1.0, 1.0, rho)
        else:
            if inputs.samp_cov is None:
                raise MissingMomentError("empirical threshold with non-unit variances needs samp_cov")
            thr = _general_threshold(
                inputs.sigma2, n, inputs.w1, inputs.w2, inputs.samp_var1, inputs.samp_var2, inputs.samp_cov
            )
            squared = True
            db = delta_bias_asymptotic(inputs.w1, inputs.w2, inputs.samp_var1, inputs.samp_var2, rho)
    else:
        raise ConfigError(f"unknown 2D threshold mode {mode!r}")

    return AggregationDecision(
        correlation=rho,
        threshold=thr,
        aggregate=satisfies(rho, thr, squared),
        delta_var=dv,
        delta_bias=db,
        mode=mode,
        squared=squared,
        margin=dv - db if math.isfinite(dv) else None,
    )


def general_condition(inputs: ThresholdInputs) -> float:
    """Left-hand side of the polynomial aggregation test (aggregate iff >= 0).

    Valid for unit population variances and arbitrary sample moments.
    """
    s1, s2, c = inputs.samp_var1, inputs.samp_var2, inputs.samp_cov
    if None in (s1, s2, c):
        raise MissingMomentError("general test needs samp_var1, samp_var2 and samp_cov")
    det = s1 * s2 - c * c
    if not det > 0:
        raise CollinearityError(f"sample moment determinant {det:.3e} is not positive")
    rho = inputs.pop_rho if inputs.pop_rho is not None else inputs.rho_hat
    s_sum = s1 + s2 + 2 * c
    var_part = inputs.sigma2 * ((s1 - s2) ** 2 + 2 * (1 - rho) * (s1 + c) * (s2 + c)) * s_sum
    bias_part = (
        (2 * (1 - rho) * (s1 + s2 + c) * c + s1**2 + s2**2 - 2 * rho * s1 * s2)
        * inputs.weight_gap2
        * (inputs.n - 1)
        * det
    )
    return var_part - bias_part


def aggregation_test_general(inputs: ThresholdInputs) -> AggregationDecision:
    poly = general_condition(inputs)
    rho_pop = inputs.pop_rho if inputs.pop_rho is not None else inputs.rho_hat
    dv = delta_var_general(inputs.sigma2, inputs.n, inputs.samp_var1, inputs.samp_var2, inputs.samp_cov, rho_pop)
    db = delta_bias_general(inputs.w1, inputs.w2, inputs.samp_var1, inputs.samp_var2, inputs.samp_cov, rho_pop)
    equal = inputs.weight_gap2 < EQUAL_WEIGHTS_TOL
    return AggregationDecision(
        correlation=inputs.rho_hat,
        threshold=Sentinel.ALWAYS if equal else None,
        aggregate=equal or poly >= 0,
        delta_var=dv,
        delta_bias=db,
        mode="general",
        margin=poly,
    )


# --------------------------------------------------------------------------
# Three features (and D features through a combined third feature)
# --------------------------------------------------------------------------


def interval_3d(a: float, b: float) -> tuple[float, float] | Sentinel:
    """Correlation interval where averaging x1, x2 pays off with a third feature present.

    ``a = sigma2 / ((n-1)(w1-w2)^2)`` and
    ``b = sigma_x3 (rho13 - rho23) w3 / (w1 - w2)``. The interval is clipped to
    [-1, 1]; a negative discriminant means no correlation qualifies.
    """
    disc = a * (a - 2 * b)
    if disc < 0:
        return Sentinel.NEVER
    root = math.sqrt(disc)
    lo = max(-1.0, 1 - (a - b) - root)
    hi = min(1.0, 1 - (a - b) + root)
    if lo > hi:
        return Sentinel.NEVER
    return (lo, hi)


def threshold_3d_interval(inputs: ThresholdInputs) -> AggregationDecision:
    if None in (inputs.w3, inputs.rho13, inputs.rho23):
        raise MissingMomentError("3D interval needs w3, rho13 and rho23")
    rho = inputs.rho_hat
    n = inputs.n
    dv = delta_var_asymptotic(inputs.sigma2, n)
    coupling = inputs.sigma_x3 * (inputs.rho13 - inputs.rho23) * inputs.w3
    gap = inputs.w1 - inputs.w2

    if gap * gap < EQUAL_WEIGHTS_TOL:
        if abs(coupling) < math.sqrt(EQUAL_WEIGHTS_TOL):
            thr: tuple[float, float] | Sentinel = Sentinel.ALWAYS
        else:
            # Limit of the interval as w1 -> w2: only the coupling term remains.
            upper = 1.0 - coupling**2 * (n - 1) / (2 * inputs.sigma2) if inputs.sigma2 > 0 else -math.inf
            thr = (-1.0, upper) if upper >= -1.0 else Sentinel.NEVER
    else:
        a = inputs.sigma2 / ((n - 1) * gap * gap)
        b = coupling / gap
        thr = interval_3d(a, b)

    if rho < 1.0:
        db = delta_bias_3d(inputs.w1, inputs.w2, inputs.w3, rho, inputs.rho13, inputs.rho23, inputs.sigma_x3)
    else:
        db = None
    return AggregationDecision(
        correlation=rho,
        threshold=thr,
        aggregate=satisfies(rho, thr),
        delta_var=dv,
        delta_bias=db,
        mode="3d",
        margin=None if db is None else dv - db,
    )


# --------------------------------------------------------------------------
# Confidence-bounded thresholds
# --------------------------------------------------------------------------


def threshold_conf_empirical(fit: LinearFit, samp_var_x: float, n: int, delta: float) -> float:
    """Threshold built only from data, valid with probability at least ``1 - delta``.

    Lower-bounds the noise variance with a chi-squared critical value and
    upper-bounds ``|w1 - w2|`` with simultaneous F-based intervals on the two
    fitted weights.
    """
    if n < 5:
        raise DegenerateSampleError(f"need n >= 5, got {n}")
    if fit.p != 2:
        raise ConfigError("confidence threshold needs the bivariate fit of the pair")
    chi2 = chi2_upper_quantile(n - 3, delta / 2)
    f_crit = f_upper_quantile(3, n - 3, delta / 2)
    sd1, sd2 = fit.weight_sd
    gap = abs(fit.weights[0] - fit.weights[1]) + math.sqrt(3 * f_crit) * (sd1 + sd2)
    numerator = 2 * (n - 3) * fit.residual_variance
    if numerator == 0:
        return 1.0
    if gap == 0:
        return -math.inf
    return 1.0 - numerator / ((n - 1) * chi2 * samp_var_x) / gap**2


def threshold_conf_theoretical(sigma2: float, pop_var_x: float, w1: float, w2: float, n: int, delta: float) -> float:
    """Threshold built only from true quantities, valid with probability at least ``1 - delta``."""
    if not pop_var_x > 0:
        raise DegenerateSampleError("population variance must be positive")
    if n < 2 or not 0 < delta < 1:
        raise ConfigError("need n >= 2 and delta in (0, 1)")
    gap2 = (w1 - w2) ** 2
    base = -math.inf if gap2 < EQUAL_WEIGHTS_TOL else 1 - 2 * sigma2 / ((n - 1) * pop_var_x * gap2)
    l2 = math.log(2 / delta) / (n - 1)
    correction = (2 * l2 + 2 * math.sqrt(pop_var_x) * math.sqrt(2 * l2) + 4 * math.sqrt(math.log(8 / delta) / (n - 1))) / pop_var_x
    return base + correction


def hoeffding_cov_bounds(n: int, delta: float) -> tuple[float, float]:
    """Deviation bounds ``(upper, lower)`` on the sample covariance of [0, 1]-bounded variables.

    With probability ``1 - delta``, ``cov_hat - cov <= upper``; likewise
    ``cov - cov_hat <= lower``.
    """
    if n < 2 or not 0 < delta < 1:
        raise ConfigError("need n >= 2 and delta in (0, 1)")
    root = math.sqrt(math.log(4 / delta) / (n - 1))
    return 3 * root, 4 * root
