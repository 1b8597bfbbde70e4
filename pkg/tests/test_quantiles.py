import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from lincfa.errors import QuantileDomainError
from lincfa.quantiles import chi2_upper_quantile, f_upper_quantile


def test_reference_values():
    assert chi2_upper_quantile(10, 0.05) == pytest.approx(18.3070, abs=5e-5)
    assert f_upper_quantile(3, 60, 0.05) == pytest.approx(2.7581, abs=5e-5)


@pytest.mark.parametrize("k", [2, 3, 10, 57, 497])
def test_median_bracket(k):
    assert k - 1 <= chi2_upper_quantile(k, 0.5) <= k


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 2000), st.floats(1e-6, 1 - 1e-6))
def test_chi2_against_scipy(df, alpha):
    assert chi2_upper_quantile(df, alpha) == pytest.approx(stats.chi2.isf(alpha, df), rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.integers(1, 2000), st.floats(1e-5, 1 - 1e-5))
def test_f_against_scipy(d1, d2, alpha):
    assert f_upper_quantile(d1, d2, alpha) == pytest.approx(stats.f.isf(alpha, d1, d2), rel=1e-6)


@pytest.mark.parametrize("args", [(10, 0.0), (10, 1.0), (0, 0.5), (10, -0.1)])
def test_chi2_domain(args):
    with pytest.raises(QuantileDomainError):
        chi2_upper_quantile(*args)


def test_f_domain():
    with pytest.raises(QuantileDomainError):
        f_upper_quantile(3, 0, 0.05)
