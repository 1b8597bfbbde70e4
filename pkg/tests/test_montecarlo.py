import numpy as np
import pytest

from lincfa.errors import ConfigError, InsufficientRepetitionsError
from lincfa.lab.generators import GeneratorSpec, build_structure
from lincfa.lab.montecarlo import aggregation_matrix, monte_carlo_bias_variance, variance_difference
from lincfa.thresholds import delta_bias_asymptotic


def test_too_few_reps():
    with pytest.raises(InsufficientRepetitionsError):
        monte_carlo_bias_variance(GeneratorSpec(), "full", reps=50)


def test_unknown_model():
    with pytest.raises(ConfigError):
        monte_carlo_bias_variance(GeneratorSpec(), "magic", reps=100)
    with pytest.raises(ConfigError):
        monte_carlo_bias_variance(GeneratorSpec(), "reduced", reps=100)


def test_aggregation_matrix():
    A = aggregation_matrix(((0, 2), (1,)), 3)
    np.testing.assert_array_equal(A, [[0.5, 0], [0, 1], [0.5, 0]])


def test_noise_free_full_model():
    spec = GeneratorSpec("trivariate", n=60, sigma=0.0, seed=1)
    r = monte_carlo_bias_variance(spec, "full", 100)
    assert r.bias2.value == pytest.approx(0.0, abs=1e-20)
    assert r.variance.value == pytest.approx(0.0, abs=1e-20)


def test_reduced_equals_aggregated_pair():
    spec = GeneratorSpec("trivariate", n=100, sigma=0.5, seed=4)
    a = monte_carlo_bias_variance(spec, "aggregated-pair", 100)
    b = monte_carlo_bias_variance(spec, "reduced", 100, groups=((0, 1), (2,)))
    assert a.bias2 == b.bias2 and a.variance == b.variance


def test_parallel_is_deterministic():
    spec = GeneratorSpec("bivariate", n=80, sigma=1.0, seed=2)
    a = monte_carlo_bias_variance(spec, "full", 120, workers=1)
    b = monte_carlo_bias_variance(spec, "full", 120, workers=4)
    assert a.row() == b.row()


def test_closed_forms_on_random_arms():
    rng = np.random.default_rng(2024)
    hits = 0
    for arm in range(10):
        sigma = float(rng.uniform(0.3, 5))
        w = tuple(rng.uniform(-1, 1, 2))
        mix = float(rng.uniform(0.4, 0.9))
        spec = GeneratorSpec("bivariate", n=400, sigma=sigma, weights=w, mix=mix, seed=int(rng.integers(1 << 30)))
        full = monte_carlo_bias_variance(spec, "full", 400, arm=arm)
        aggr = monte_carlo_bias_variance(spec, "aggregated-pair", 400, arm=arm)
        rho = build_structure(spec).pop_corr[0, 1]
        assert full.self_check and aggr.self_check
        assert abs(full.realized_noise - sigma**2) < 6 * sigma**2 * np.sqrt(2 / 400)
        ok_var = variance_difference(full, aggr).within(sigma**2 / 399)
        ok_bias = aggr.bias2.within(delta_bias_asymptotic(w[0], w[1], 1, 1, rho))
        hits += ok_var and ok_bias
    assert hits >= 9
