import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrivalkit.distributions import log_binned_density, size_ccdf
from arrivalkit.errors import FitError, InsufficientDataError
from arrivalkit.estimators import (
    _ccdf_fit_points,
    density_slope,
    fit_lognormal,
    fit_q_exponential,
    fit_slope,
)
from arrivalkit.generator import sample_q_exponential_size

S_STAR, GAMMA_M1 = 7.9e5, 0.76


def _q_sizes(n, seed, s_star=S_STAR, g=GAMMA_M1):
    u = 1 - np.random.default_rng(seed).random(n)
    return sample_q_exponential_size(u, s_star, g)


@pytest.mark.parametrize("seed", range(5))
def test_q_exponential_recovery(seed):
    fit = fit_q_exponential(size_ccdf(_q_sizes(10**5, seed)))
    assert abs(fit.s_star / S_STAR - 1) < 0.10
    assert abs(fit.gamma_minus_1 / GAMMA_M1 - 1) < 0.05
    assert fit.prefactor == pytest.approx(10**5, rel=0.05)
    assert fit.converged


@pytest.mark.parametrize("seed", range(3))
def test_q_exponential_power_law_limit(seed):
    # every size sits far above any crossover scale
    u = 1 - np.random.default_rng(seed).random(10**5)
    sizes = np.rint(1e4 * u ** (-1 / GAMMA_M1)).astype(np.int64)
    ccdf = size_ccdf(sizes)
    fit = fit_q_exponential(ccdf, strict=False)
    s, n = _ccdf_fit_points(ccdf, 60, None)
    loglog = fit_slope(s, n)
    tol = 3 * np.hypot(fit.std_errors["gamma_minus_1"], loglog.std_error)
    assert abs(fit.gamma_minus_1 - loglog.exponent) < tol
    assert fit.s_star < 1e4


def test_q_exponential_deterministic():
    ccdf = size_ccdf(_q_sizes(20000, 1))
    assert fit_q_exponential(ccdf) == fit_q_exponential(ccdf)


def test_q_exponential_residual_weakly_decreasing_in_cap():
    ccdf = size_ccdf(_q_sizes(20000, 4))
    residuals = [fit_q_exponential(ccdf, max_nfev=cap, strict=False).residual for cap in (4, 8, 16, 64, 2000)]
    assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))


def test_q_exponential_cap_raises_when_strict():
    ccdf = size_ccdf(_q_sizes(20000, 4))
    with pytest.raises(FitError) as info:
        fit_q_exponential(ccdf, max_nfev=3)
    assert "nfev" in info.value.diagnostics


def test_q_exponential_degenerate_support():
    with pytest.raises(InsufficientDataError):
        fit_q_exponential(size_ccdf(np.arange(1, 50)))
    with pytest.raises(InsufficientDataError):
        fit_q_exponential(size_ccdf(np.full(100, 7)))


def test_q_exponential_bootstrap_errors():
    ccdf = size_ccdf(_q_sizes(5000, 2))
    a = fit_q_exponential(ccdf, bootstrap=20, seed=1)
    b = fit_q_exponential(ccdf, bootstrap=20, seed=1)
    assert a.std_errors == b.std_errors
    assert all(v > 0 for v in a.std_errors.values())


def test_q_exponential_json():
    d = json.loads(json.dumps(fit_q_exponential(size_ccdf(_q_sizes(20000, 3))).to_dict()))
    assert set(d) == {"model", "params", "std_errors", "fit_range", "residual", "n_points"}
    assert set(d["params"]) == {"s_star", "gamma_minus_1", "prefactor"}


def test_lognormal_degenerate():
    with pytest.raises(FitError):
        fit_lognormal(np.full(200, 3.0))


def test_lognormal_rejects_nonpositive_and_small():
    with pytest.raises(FitError):
        fit_lognormal(np.r_[np.ones(200), 0.0])
    with pytest.raises(InsufficientDataError):
        fit_lognormal(np.arange(1, 50.0))


def test_lognormal_recovery():
    m, sigma = -3.41, 2.16
    x = np.random.default_rng(8).lognormal(m, sigma, 10**6)
    fit = fit_lognormal(x)
    assert abs(fit.m - m) < 3 * fit.std_errors["m"]
    assert abs(fit.sigma - sigma) < 3 * fit.std_errors["sigma"]
    assert fit.residual < 0.01
    assert fit.std_errors["m"] == pytest.approx(fit.sigma / 1000)


@given(st.floats(1e-6, 1e6))
@settings(max_examples=30)
def test_lognormal_scale_equivariance(c):
    x = np.random.default_rng(0).lognormal(0.3, 1.1, 500)
    a, b = fit_lognormal(x), fit_lognormal(c * x)
    assert b.sigma == pytest.approx(a.sigma, rel=1e-9, abs=1e-12)
    assert b.m == pytest.approx(a.m + np.log(c), abs=1e-9)


def test_slope_exact_power_law():
    x = np.geomspace(1, 1e4, 20)
    fit = fit_slope(x, x**-1.3)
    assert abs(fit.exponent - 1.3) < 1e-10
    assert fit.r_squared == pytest.approx(1.0)


def test_slope_constant():
    x = np.geomspace(1, 100, 10)
    fit = fit_slope(x, np.full(10, 4.2))
    assert abs(fit.exponent) < 1e-12
    assert fit.intercept == pytest.approx(np.log(4.2))


def test_slope_range_and_errors():
    x = np.geomspace(1, 1e6, 61)
    y = np.where(x < 1e3, x**-0.5, 1e3**1.5 * x**-2.0)
    fit = fit_slope(x, y, (1, 999))
    assert fit.exponent == pytest.approx(0.5, abs=1e-10)
    assert fit.fit_range == (1, 999)
    with pytest.raises(InsufficientDataError):
        fit_slope(x, y, (10, 20))
    with pytest.raises(ValueError):
        fit_slope(x, y, (5, 5))


@given(st.floats(-2, 2), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
@settings(max_examples=50)
def test_slope_equivariance(alpha, cx, cy):
    rng = np.random.default_rng(7)
    x = np.geomspace(1, 1e3, 30)
    y = x**-alpha * np.exp(rng.normal(0, 0.1, 30))
    base = fit_slope(x, y)
    assert fit_slope(x, cy * y).exponent == pytest.approx(base.exponent, abs=1e-9)
    assert fit_slope(cx * x, y, (cx * 1, cx * 1e3)).exponent == pytest.approx(base.exponent, abs=1e-9)


def test_density_slope_on_pareto_samples():
    # density of a Pareto tail x^-(1+k) with k = 0.3
    u = 1 - np.random.default_rng(4).random(10**6)
    x = 10 * u ** (-1 / 0.3)
    fit = density_slope(log_binned_density(x), (60, 86400))
    assert fit.exponent == pytest.approx(1.3, abs=0.03)


def test_fit_serializations():
    fit = fit_slope(np.geomspace(1, 10, 6), np.geomspace(1, 10, 6) ** -1.0)
    d = json.loads(json.dumps(fit.to_dict()))
    assert d["model"] == "power_law" and d["n_points"] == 6
    ln = fit_lognormal(np.random.default_rng(0).lognormal(0, 1, 300)).to_dict()
    assert set(ln) == {"model", "params", "std_errors", "fit_range", "residual", "n_points"}
