import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lincfa.errors import CollinearityError, InconsistencyError, InsufficientSamplesError, SingularDesignError
from lincfa.linreg import (
    clamp_nonnegative,
    expected_weight_1d,
    model_bias_1d,
    model_variance_1d,
    model_variance_2d,
    ols_fit,
    weight_covariance_2d,
    weight_variance_1d,
)


def test_ols_matches_lstsq():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, -2.0, 0.5] + rng.normal(scale=0.3, size=50)
    fit = ols_fit(X, y)
    ref, *_ = np.linalg.lstsq(X, y, rcond=None)
    np.testing.assert_allclose(fit.weights, ref, rtol=1e-10)
    resid = y - X @ ref
    assert fit.residual_variance == pytest.approx(resid @ resid / (50 - 3 - 1), rel=1e-10)
    np.testing.assert_allclose(fit.weight_covariance, np.linalg.inv(X.T @ X) * fit.residual_variance, rtol=1e-9)
    np.testing.assert_allclose(fit.predict(X), X @ ref, rtol=1e-10)


def test_ols_exact_fit():
    X = np.arange(12.0).reshape(6, 2) ** [1, 2]
    fit = ols_fit(X, X @ [2.0, 3.0])
    np.testing.assert_allclose(fit.weights, [2.0, 3.0], rtol=1e-10)
    assert fit.residual_variance == pytest.approx(0.0, abs=1e-18)


def test_ols_errors():
    X = np.random.default_rng(0).normal(size=(3, 2))
    with pytest.raises(InsufficientSamplesError):
        ols_fit(X, np.zeros(3))
    col = np.arange(10.0)
    with pytest.raises(SingularDesignError):
        ols_fit(np.column_stack([col, 2 * col]), col)


def test_weight_covariance_2d_matches_inverse():
    v1, v2, c, n, s2 = 1.3, 0.7, 0.4, 51, 2.0
    cov = weight_covariance_2d(s2, v1, v2, c, n)
    np.testing.assert_allclose(cov, s2 * np.linalg.inv(np.array([[v1, c], [c, v2]]) * (n - 1)), rtol=1e-12)
    with pytest.raises(CollinearityError):
        weight_covariance_2d(1.0, 1.0, 1.0, 1.0, 10)


def test_weight_variance_1d():
    assert weight_variance_1d(2.0, 0.5, 41) == pytest.approx(0.1)


def test_expected_weight_equal_weights():
    assert expected_weight_1d(0.3, 0.3, 1.2, 0.8, 0.1) == pytest.approx(0.6)


def test_clamp():
    assert clamp_nonnegative(-1e-14) == 0.0
    assert clamp_nonnegative(2.0) == 2.0
    with pytest.raises(InconsistencyError):
        clamp_nonnegative(-1e-3)


def test_model_bias_zero_when_sample_equals_population_and_equal_weights():
    assert model_bias_1d(0.5, 0.5, 1, 1, 0.3, 1.1, 0.9, 0.2) == pytest.approx(0.0, abs=1e-15)


def _direct_bias(w, pop, samp):
    """Squared bias of the averaged model computed from the projection definition."""
    a = np.array([0.5, 0.5])
    beta = 2 * (w @ samp @ np.ones(2)) / (np.ones(2) @ samp @ np.ones(2))
    coef = a * beta
    u = coef - w
    return u @ pop @ u


@settings(max_examples=200)
@given(
    st.floats(-2, 2), st.floats(-2, 2),
    st.floats(0.2, 3), st.floats(0.2, 3), st.floats(-0.9, 0.9),
    st.floats(0.2, 3), st.floats(0.2, 3), st.floats(-0.9, 0.9),
)
def test_model_bias_matches_projection(w1, w2, pv1, pv2, pr, sv1, sv2, sr):
    pc = pr * np.sqrt(pv1 * pv2)
    sc = sr * np.sqrt(sv1 * sv2)
    pop = np.array([[pv1, pc], [pc, pv2]])
    samp = np.array([[sv1, sc], [sc, sv2]])
    direct = _direct_bias(np.array([w1, w2]), pop, samp)
    got = model_bias_1d(w1, w2, pv1, pv2, pc, sv1, sv2, sc)
    assert got == pytest.approx(direct, rel=1e-9, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(-0.9, 0.9), st.floats(0.2, 3), st.floats(0.2, 3), st.floats(-0.9, 0.9))
def test_model_variance_2d_trace_form(pv1, pv2, pr, sv1, sv2, sr):
    n, s2 = 37, 1.7
    pc = pr * np.sqrt(pv1 * pv2)
    sc = sr * np.sqrt(sv1 * sv2)
    pop = np.array([[pv1, pc], [pc, pv2]])
    cov = weight_covariance_2d(s2, sv1, sv2, sc, n)
    assert model_variance_2d(s2, pv1, pv2, pc, sv1, sv2, sc, n) == pytest.approx(np.trace(pop @ cov), rel=1e-10)
    assert model_variance_1d(s2, 4.0, 2.0, n) == pytest.approx(2 * s2 / (n - 1))
