"""
Dependence analysis of interval sequences and count series.

``autocorrelation`` is the raw lag covariance of an interval sequence,

    a(tau) = 1/(N - tau) * sum_i s_i s_{i+tau},   s_i = t_i - mean(t),

and ``power_spectrum`` is a Bartlett estimate: non-overlapping, untapered,
mean-subtracted segments whose periodograms are averaged and then averaged
again inside logarithmically spaced frequency bins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .distributions import IntervalSet
from .errors import InsufficientDataError
from .estimators import SlopeFit, fit_slope
from .ingest import EventLog

DEFAULT_SEGMENT = 2**20
DEFAULT_BINS_PER_DECADE = 10
DEFAULT_FIT_BAND = (1e-6, 1e-3)


@dataclass(frozen=True)
class Autocorrelation:
    lags: np.ndarray
    values: np.ndarray
    n: int

    def normalized(self):
        return self.values / self.values[0]

    def to_csv(self):
        rows = ["lag,a_tau"] + [f"{l},{v!r}" for l, v in zip(self.lags.tolist(), self.values.tolist())]
        return "\n".join(rows) + "\n"


def _as_array(x):
    return np.asarray(getattr(x, "intervals", x), dtype=np.float64)


def autocorrelation(intervals, tau_max) -> Autocorrelation:
    """Lag covariance with the global mean removed once and divisor N - tau."""
    t = _as_array(intervals)
    n = len(t)
    if tau_max < 0:
        raise ValueError("tau_max must be >= 0")
    if tau_max >= n:
        raise InsufficientDataError(f"tau_max={tau_max} needs more than {n} intervals")
    s = t - t.mean()
    vals = np.empty(tau_max + 1)
    for tau in range(tau_max + 1):
        vals[tau] = np.dot(s[: n - tau], s[tau:]) / (n - tau)
    return Autocorrelation(np.arange(tau_max + 1), vals, n)


def shuffle_intervals(intervals, seed):
    """Uniform random permutation of the sequence, reproducible per seed."""
    rng = np.random.default_rng(seed)
    if isinstance(intervals, IntervalSet):
        return intervals.with_intervals(rng.permutation(intervals.intervals))
    return rng.permutation(np.asarray(intervals))


def noise_band(acf: Autocorrelation, n_sigma=3.0):
    """Half-width n_sigma * a(0) / sqrt(n) expected for independent intervals."""
    return n_sigma * acf.values[0] / np.sqrt(acf.n)


@dataclass(frozen=True)
class CountSeries:
    t0: int
    counts: np.ndarray

    @property
    def length(self):
        return len(self.counts)


def counts_per_second(log: EventLog) -> CountSeries:
    if len(log) == 0:
        raise InsufficientDataError("empty log")
    ts = np.floor(log.timestamps).astype(np.int64)
    t0 = int(ts[0])
    return CountSeries(t0, np.bincount(ts - t0))


def segment_periodogram(x):
    """One-sided periodogram of a single mean-subtracted segment.

    Normalized as |X_k|^2 / L and doubled for frequencies that have a
    negative-frequency twin, so ``power.sum() == L * var(x)`` (Parseval).
    Frequencies are in cycles per sample.
    """
    x = np.asarray(x, dtype=np.float64)
    L = len(x)
    X = np.fft.rfft(x - x.mean())
    p = np.abs(X) ** 2 / L
    p[1 : (L + 1) // 2] *= 2
    return np.fft.rfftfreq(L), p


@dataclass(frozen=True)
class PowerSpectrum:
    freqs: np.ndarray
    power: np.ndarray
    segment_length: int
    n_segments: int
    bins_per_decade: int
    n_per_bin: np.ndarray

    def to_csv(self):
        rows = ["freq_hz,power"] + [f"{f!r},{p!r}" for f, p in zip(self.freqs.tolist(), self.power.tolist())]
        return "\n".join(rows) + "\n"


def average_periodogram(counts, segment_length=DEFAULT_SEGMENT):
    """Mean raw periodogram over non-overlapping segments; DC bin dropped."""
    counts = np.asarray(counts, dtype=np.float64)
    n_seg = len(counts) // segment_length
    if n_seg < 1:
        raise InsufficientDataError(
            f"series of length {len(counts)} is shorter than one segment ({segment_length})"
        )
    segs = counts[: n_seg * segment_length].reshape(n_seg, segment_length)
    acc = np.zeros(segment_length // 2 + 1)
    for seg in segs:
        f, p = segment_periodogram(seg)
        acc += p
    return f[1:], acc[1:] / n_seg, n_seg


def log_bin_spectrum(freqs, power, bins_per_decade=DEFAULT_BINS_PER_DECADE):
    """Average power inside log-spaced frequency bins.

    Returns the geometric mean frequency of each nonempty bin, the mean
    power, and how many raw frequencies each bin holds.
    """
    lf = np.log10(freqs)
    idx = np.floor((lf - lf[0]) * bins_per_decade + 1e-9).astype(np.int64)
    n = np.bincount(idx)
    keep = n > 0
    p = np.bincount(idx, weights=power)[keep] / n[keep]
    fc = 10 ** (np.bincount(idx, weights=lf)[keep] / n[keep])
    return fc, p, n[keep]


def power_spectrum(
    series, segment_length=DEFAULT_SEGMENT, bins_per_decade=DEFAULT_BINS_PER_DECADE
) -> PowerSpectrum:
    """Segment-averaged, log-binned power spectrum of a 1 Hz count series."""
    counts = series.counts if isinstance(series, CountSeries) else series
    f, p, n_seg = average_periodogram(counts, segment_length)
    fc, pc, n = log_bin_spectrum(f, p, bins_per_decade)
    return PowerSpectrum(fc, pc, segment_length, n_seg, bins_per_decade, n)


def spectral_slope(spec: PowerSpectrum, band=DEFAULT_FIT_BAND) -> SlopeFit:
    """Fit S(f) ~ f**-alpha over ``band``; ``exponent`` is alpha."""
    return fit_slope(spec.freqs, spec.power, band)


def spectrum_sidecar(spec: PowerSpectrum, band, fit: SlopeFit | None = None):
    d = {
        "segment_length": spec.segment_length,
        "n_segments": spec.n_segments,
        "bins_per_decade": spec.bins_per_decade,
        "fit_band": list(band),
    }
    if fit is not None:
        d["fit"] = fit.to_dict()
    return json.dumps(d, indent=2)


def powerlaw_noise(n, alpha, rng=None):
    """Gaussian series with spectrum ~ f**-alpha, by random-phase spectral synthesis."""
    rng = np.random.default_rng(rng)
    f = np.fft.rfftfreq(n)
    amp = np.zeros_like(f)
    amp[1:] = f[1:] ** (-alpha / 2)
    coef = amp * (rng.standard_normal(len(f)) + 1j * rng.standard_normal(len(f)))
    if n % 2 == 0:
        coef[-1] = coef[-1].real
    x = np.fft.irfft(coef, n)
    return x / x.std()


__all__ = [
    "Autocorrelation",
    "CountSeries",
    "PowerSpectrum",
    "autocorrelation",
    "shuffle_intervals",
    "noise_band",
    "counts_per_second",
    "segment_periodogram",
    "average_periodogram",
    "log_bin_spectrum",
    "power_spectrum",
    "spectral_slope",
    "spectrum_sidecar",
    "powerlaw_noise",
]
