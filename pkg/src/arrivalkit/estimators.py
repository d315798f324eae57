"""
Parametric fits: q-exponential size CCDF, log-normal scaling function and
power-law slopes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import FitError, InsufficientDataError

DEFAULT_MIN_COUNT = 20
CCDF_TAIL_FRACTION = 0.01
USER_FIT_RANGE = (60.0, 86400.0)


def _json_float(x):
    x = float(x)
    return x if np.isfinite(x) else None


@dataclass(frozen=True)
class QExpFit:
    s_star: float
    gamma_minus_1: float
    prefactor: float
    std_errors: dict
    residual: float
    n_points: int
    fit_range: tuple
    converged: bool = True
    nfev: int = 0

    def model(self, s):
        return self.prefactor * (1 + np.asarray(s, dtype=np.float64) / self.s_star) ** -self.gamma_minus_1

    def to_dict(self):
        return {
            "model": "q_exponential",
            "params": {
                "s_star": self.s_star,
                "gamma_minus_1": self.gamma_minus_1,
                "prefactor": self.prefactor,
            },
            "std_errors": {k: _json_float(v) for k, v in self.std_errors.items()},
            "fit_range": list(self.fit_range),
            "residual": self.residual,
            "n_points": self.n_points,
        }


def _ccdf_fit_points(ccdf, n_points, min_count):
    s = np.asarray(ccdf.sizes, dtype=np.float64)
    n = np.asarray(ccdf.n_gt, dtype=np.float64)
    if min_count is None:
        min_count = max(DEFAULT_MIN_COUNT, int(np.ceil(CCDF_TAIL_FRACTION * ccdf.multiplicity.sum())))
    ok = (s > 0) & (n >= min_count)
    s, n = s[ok], n[ok]
    if len(s) < 10:
        raise InsufficientDataError(f"{len(s)} usable CCDF points, need at least 10")
    if s[-1] / s[0] < 100:
        raise InsufficientDataError("CCDF support spans less than 2 decades")
    # nearest observed size to each log-spaced target
    targets = np.geomspace(s[0], s[-1], n_points)
    idx = np.unique(np.clip(np.searchsorted(np.log(s), np.log(targets)), 0, len(s) - 1))
    return s[idx], n[idx]


def _qexp_lsq(s, n, max_nfev, x0=None):
    ln = np.log(n)

    def resid(p):
        lnA, lnS, lng = p
        return ln - (lnA - np.exp(lng) * np.log1p(s / np.exp(lnS)))

    if x0 is None:
        x0 = np.array([ln[0], np.log(np.median(s)), np.log(0.5)])
    return optimize.least_squares(resid, x0, method="lm", max_nfev=max_nfev, xtol=1e-12, ftol=1e-12)


def fit_q_exponential(
    ccdf, n_points=60, min_count=None, max_nfev=2000, strict=True, bootstrap=0, seed=0
) -> QExpFit:
    """Least-squares fit of ln N(>S) = ln A - (gamma-1) ln(1 + S/S*).

    Uses CCDF points nearest to ``n_points`` log-spaced sizes, keeping only
    points with at least ``min_count`` events above them (default: 1% of
    the sample, and never fewer than 20). Standard errors
    come from the Gauss-Newton covariance s^2 (J^T J)^-1, propagated from
    the log parameters; with ``bootstrap > 0`` they are replaced by the
    spread over that many multinomial resamples of the underlying sizes.
    With ``strict`` a fit that hits ``max_nfev`` raises FitError.
    """
    s, n = _ccdf_fit_points(ccdf, n_points, min_count)
    res = _qexp_lsq(s, n, max_nfev)
    capped = res.status == 0
    if not np.all(np.isfinite(res.x)) or (strict and (capped or not res.success)):
        raise FitError(
            "q-exponential fit did not converge",
            {"status": int(res.status), "message": res.message, "nfev": int(res.nfev), "x": res.x.tolist()},
        )
    lnA, lnS, lng = res.x
    dof = max(len(s) - 3, 1)
    mse = float(np.sum(res.fun**2) / len(s))
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * (np.sum(res.fun**2) / dof)
        se_log = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        se_log = np.full(3, np.inf)
    A, S_star, g = np.exp(lnA), np.exp(lnS), np.exp(lng)
    errors = {"prefactor": A * se_log[0], "s_star": S_star * se_log[1], "gamma_minus_1": g * se_log[2]}

    if bootstrap:
        errors = _bootstrap_qexp(ccdf, bootstrap, seed, n_points, min_count, max_nfev, res.x)

    return QExpFit(
        float(S_star), float(g), float(A), errors, mse, len(s), (float(s[0]), float(s[-1])),
        converged=not capped, nfev=int(res.nfev),
    )


def _bootstrap_qexp(ccdf, n_boot, seed, n_points, min_count, max_nfev, x0):
    from .distributions import SizeCCDF

    rng = np.random.default_rng(seed)
    mult = np.asarray(ccdf.multiplicity)
    total = int(mult.sum())
    draws = []
    for _ in range(n_boot):
        m = rng.multinomial(total, mult / total)
        keep = m > 0
        sizes, m = ccdf.sizes[keep], m[keep]
        boot = SizeCCDF(sizes, total - np.cumsum(m), m, int(m[sizes > 0].sum()))
        try:
            s, n = _ccdf_fit_points(boot, n_points, min_count)
        except InsufficientDataError:
            continue
        res = _qexp_lsq(s, n, max_nfev, x0=x0)
        if res.success:
            draws.append(np.exp(res.x))
    if len(draws) < 2:
        raise FitError("bootstrap produced fewer than 2 successful fits")
    sd = np.std(np.array(draws), axis=0, ddof=1)
    return {"prefactor": float(sd[0]), "s_star": float(sd[1]), "gamma_minus_1": float(sd[2])}


@dataclass(frozen=True)
class LogNormalFit:
    m: float
    sigma: float
    std_errors: dict
    residual: float
    n_points: int

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.exp(-((np.log(x) - self.m) ** 2) / (2 * self.sigma**2)) / (
            np.sqrt(2 * np.pi) * self.sigma * x
        )

    def to_dict(self):
        return {
            "model": "lognormal",
            "params": {"m": self.m, "sigma": self.sigma},
            "std_errors": self.std_errors,
            "fit_range": None,
            "residual": self.residual,
            "n_points": self.n_points,
        }


def fit_lognormal(samples, min_samples=100) -> LogNormalFit:
    """Maximum-likelihood log-normal fit to positive samples.

    ``residual`` is the Kolmogorov-Smirnov distance between the samples and
    the fitted distribution.
    """
    x = np.asarray(getattr(samples, "intervals", samples), dtype=np.float64)
    if np.any(x <= 0):
        raise FitError("log-normal fit needs strictly positive samples")
    n = len(x)
    if n < min_samples:
        raise InsufficientDataError(f"{n} samples, need at least {min_samples}")
    lx = np.log(x)
    m = float(lx.mean())
    sigma = float(lx.std())
    if not sigma > 1e-12 * max(1.0, abs(m)):
        raise FitError("degenerate log-normal fit: zero spread", {"m": m, "sigma": sigma})
    from scipy import stats

    ks = float(stats.kstest(lx, "norm", args=(m, sigma)).statistic)
    return LogNormalFit(m, sigma, {"m": sigma / np.sqrt(n), "sigma": sigma / np.sqrt(2 * n)}, ks, n)


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    fit_range: tuple
    std_error: float
    r_squared: float
    n_points: int
    residuals: np.ndarray = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            "model": "power_law",
            "params": {"exponent": self.exponent, "intercept": self.intercept},
            "std_errors": {"exponent": _json_float(self.std_error)},
            "fit_range": list(self.fit_range),
            "residual": float(np.mean(self.residuals**2)) if self.residuals is not None else None,
            "r_squared": _json_float(self.r_squared),
            "n_points": self.n_points,
        }


def fit_slope(x, y, fit_range=None, min_points=5) -> SlopeFit:
    """OLS of ln y on ln x inside ``fit_range``; returns alpha for y ~ x**-alpha."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lo, hi = fit_range if fit_range is not None else (x.min(), x.max())
    if not lo < hi:
        raise ValueError("fit range needs lo < hi")
    sel = (x >= lo) & (x <= hi) & (y > 0) & (x > 0)
    n = int(sel.sum())
    if n < min_points:
        raise InsufficientDataError(f"{n} points in [{lo:g}, {hi:g}], need at least {min_points}")
    lx, ly = np.log(x[sel]), np.log(y[sel])
    mx, my = lx.mean(), ly.mean()
    dx = lx - mx
    sxx = np.dot(dx, dx)
    if sxx == 0:
        raise InsufficientDataError("all abscissae equal")
    slope = np.dot(dx, ly - my) / sxx
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(ly - my, ly - my))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    se = np.sqrt(ss_res / (n - 2) / sxx) if n > 2 else np.inf
    return SlopeFit(float(-slope), float(intercept), (float(lo), float(hi)), float(se), r2, n, resid)


def density_slope(density, fit_range=USER_FIT_RANGE, min_count=DEFAULT_MIN_COUNT) -> SlopeFit:
    """Power-law exponent of a LogBinnedDensity over bins with enough counts."""
    ok = density.counts >= min_count
    return fit_slope(density.centers[ok], density.densities[ok], fit_range)


def fit_json(fit, **kwargs):
    return json.dumps(fit.to_dict(), **kwargs)


__all__ = [
    "QExpFit",
    "LogNormalFit",
    "SlopeFit",
    "fit_q_exponential",
    "fit_lognormal",
    "fit_slope",
    "density_slope",
    "fit_json",
    "USER_FIT_RANGE",
]
