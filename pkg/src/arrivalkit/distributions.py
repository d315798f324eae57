"""
Inter-arrival interval sets, log-binned densities, size CCDFs, rates and
scaling collapse.

Typical use::

    ivs = thresholded_intervals(log, 1e5)
    dens = log_binned_density(ivs, bin_ratio=1.2, t_min=1.0)
    scaled = rescale_density(dens, event_rate(log, 1e5).rate)
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientDataError
from .ingest import EventLog

DEFAULT_BIN_RATIO = 1.2
DEFAULT_T_MIN = 1.0
DEFAULT_MIN_COUNT = 20


@dataclass(frozen=True)
class IntervalSet:
    """Strictly positive inter-arrival times plus the number of zero gaps removed.

    ``source`` is one of ``"threshold"``, ``"user"``, ``"users"`` (several
    users concatenated) or ``"simulated"``; ``label`` carries the threshold
    or user identifier.
    """

    intervals: np.ndarray
    source: str
    label: object = None
    n_dropped_zero: int = 0

    def __len__(self):
        return len(self.intervals)

    @property
    def mean(self):
        return float(np.mean(self.intervals))

    def with_intervals(self, intervals) -> "IntervalSet":
        return replace(self, intervals=np.asarray(intervals))


def _drop_zeros(diffs):
    keep = diffs > 0
    return diffs[keep].astype(np.float64), int(np.count_nonzero(~keep))


def thresholded_intervals(log: EventLog, S=0) -> IntervalSet:
    """Gaps between consecutive requests larger than ``S`` bytes.

    Zero-length gaps (requests logged in the same second) are removed and
    counted in ``n_dropped_zero``.
    """
    times = log.timestamps[log.sizes > S]
    if len(times) < 2:
        raise InsufficientDataError(
            f"threshold S={S:g}: {len(times)} qualifying events, need at least 2"
        )
    ivs, n_zero = _drop_zeros(np.diff(times))
    return IntervalSet(ivs, "threshold", S, n_zero)


def user_intervals(log: EventLog, user) -> IntervalSet:
    times = log.timestamps[log.users == user]
    if len(times) < 2:
        raise InsufficientDataError(f"user {user!r}: {len(times)} events, need at least 2")
    ivs, n_zero = _drop_zeros(np.diff(times))
    return IntervalSet(ivs, "user", user, n_zero)


def _group_by_user(log: EventLog):
    users = log.users.astype(str)
    # stable sort keeps each user's events in time order
    order = np.argsort(users, kind="stable")
    users_sorted = users[order]
    names, starts, counts = np.unique(users_sorted, return_index=True, return_counts=True)
    return order, names, starts, counts


def per_user_intervals(log: EventLog, min_requests=4) -> IntervalSet:
    """Concatenate each qualifying user's own inter-arrival times.

    A user qualifies with at least ``min_requests`` events; the default of 4
    means "more than three requests". Gaps are never taken across users.
    """
    order, names, starts, counts = _group_by_user(log)
    times = log.timestamps[order]
    pieces, n_zero, n_users = [], 0, 0
    for start, count in zip(starts, counts):
        if count < min_requests:
            continue
        ivs, z = _drop_zeros(np.diff(times[start : start + count]))
        pieces.append(ivs)
        n_zero += z
        n_users += 1
    if n_users == 0:
        raise InsufficientDataError(f"no user has at least {min_requests} requests")
    return IntervalSet(np.concatenate(pieces), "users", n_users, n_zero)


def user_request_counts(log: EventLog) -> dict:
    _, names, _, counts = _group_by_user(log)
    return dict(zip(names.tolist(), counts.tolist()))


def busiest_user(log: EventLog):
    counts = user_request_counts(log)
    if not counts:
        raise InsufficientDataError("log has no users")
    # ties broken by name for determinism
    return min(counts, key=lambda u: (-counts[u], u))


@dataclass(frozen=True)
class LogBinnedDensity:
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    bin_ratio: float

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    @property
    def centers(self):
        """Geometric bin centers."""
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])

    @property
    def total(self):
        return int(self.counts.sum())

    def integral(self):
        return float(np.sum(self.densities * self.widths))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "bin_center_geometric", "count", "density"])
        for lo, hi, c, n, d in zip(
            self.bin_edges[:-1], self.bin_edges[1:], self.centers, self.counts, self.densities
        ):
            w.writerow([repr(float(lo)), repr(float(hi)), repr(float(c)), int(n), repr(float(d))])
        return buf.getvalue()


def geometric_edges(lo, hi, ratio):
    """Edges lo*ratio**j, extended until the last edge exceeds ``hi``."""
    n = max(1, int(np.floor(np.log(hi / lo) / np.log(ratio))) + 1)
    edges = lo * ratio ** np.arange(n + 1)
    while edges[-1] <= hi:
        edges = np.append(edges, edges[-1] * ratio)
    return edges


def log_binned_density(
    intervals, bin_ratio=DEFAULT_BIN_RATIO, t_min=DEFAULT_T_MIN
) -> LogBinnedDensity:
    """Histogram on geometrically growing bins, normalized by bin width.

    Bins start at ``t_min`` and grow by ``bin_ratio`` until they cover the
    largest interval. Samples below ``t_min`` are not binned and the density
    is normalized over the binned samples, so it always integrates to one.
    """
    if bin_ratio <= 1:
        raise ValueError("bin_ratio must be > 1")
    if t_min <= 0:
        raise ValueError("t_min must be > 0")
    x = np.asarray(getattr(intervals, "intervals", intervals), dtype=np.float64)
    x = x[x >= t_min]
    if len(x) == 0:
        raise InsufficientDataError(f"no intervals at or above t_min={t_min:g}")
    edges = geometric_edges(t_min, x.max(), bin_ratio)
    counts, _ = np.histogram(x, bins=edges)
    dens = counts / (len(x) * np.diff(edges))
    return LogBinnedDensity(edges, dens, counts, float(bin_ratio))


def rescale_density(d: LogBinnedDensity, rate) -> LogBinnedDensity:
    """Map P(t) onto the scaling variable x = t*R: edges times R, density over R."""
    if rate <= 0:
        raise ValueError("rate must be > 0")
    return LogBinnedDensity(d.bin_edges * rate, d.densities / rate, d.counts, d.bin_ratio)


@dataclass(frozen=True)
class SizeCCDF:
    """N(>S) evaluated at every distinct observed size.

    ``multiplicity`` holds how many events have each size, which keeps the
    underlying sample recoverable (used for bootstrap errors).
    """

    sizes: np.ndarray
    n_gt: np.ndarray
    multiplicity: np.ndarray
    total: int

    @property
    def points(self):
        return list(zip(self.sizes.tolist(), self.n_gt.tolist()))

    def to_csv(self) -> str:
        lines = ["size,n_gt"]
        lines += [f"{s},{n}" for s, n in zip(self.sizes.tolist(), self.n_gt.tolist())]
        return "\n".join(lines) + "\n"


def size_ccdf(log_or_sizes) -> SizeCCDF:
    sizes = np.asarray(getattr(log_or_sizes, "sizes", log_or_sizes))
    if len(sizes) == 0:
        raise InsufficientDataError("no sizes")
    uniq, mult = np.unique(sizes, return_counts=True)
    n_gt = len(sizes) - np.cumsum(mult)
    return SizeCCDF(uniq, n_gt, mult, int(np.count_nonzero(sizes > 0)))


@dataclass(frozen=True)
class RateEntry:
    threshold: float
    n_events: int
    span: float
    rate: float

    @property
    def mean_interval(self):
        return 1.0 / self.rate

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "n_events": self.n_events,
            "span": self.span,
            "rate": self.rate,
            "mean_interval": self.mean_interval,
        }


def event_rate(log: EventLog, S=0) -> RateEntry:
    """R(S) = N(>S) / T over the full record span.

    Events that share a timestamp all count toward N(>S), even though they
    contribute zero-length gaps that the interval sets discard.
    """
    T = log.span
    if T <= 0:
        raise InsufficientDataError("log span is zero")
    n = int(np.count_nonzero(log.sizes > S))
    if n == 0:
        raise InsufficientDataError(f"threshold S={S:g}: no events larger than S")
    return RateEntry(float(S), n, float(T), n / T)


def rate_table(log: EventLog, thresholds) -> dict:
    return {float(S): event_rate(log, S) for S in thresholds}


@dataclass(frozen=True)
class CollapseResult:
    score: float
    common_support: tuple
    grid: np.ndarray = field(repr=False)
    spread: np.ndarray = field(repr=False)


def _loglog_interpolator(d: LogBinnedDensity, min_count):
    """Return f(x) giving ln density interpolated linearly in ln x.

    Only segments joining two adjacent bins that both hold ``min_count``
    samples are usable; elsewhere f returns nan.
    """
    lc = np.log(d.centers)
    valid = d.counts >= min_count
    ld = np.where(valid, np.log(np.where(valid, d.densities, 1.0)), 0.0)
    nxt = np.append(valid[1:], False)

    def f(x):
        lx = np.log(x)
        j = np.searchsorted(lc, lx, side="right") - 1
        jc = np.clip(j, 0, len(lc) - 1)
        inside = (j >= 0) & valid[jc] & ((lx == lc[jc]) | nxt[jc])
        return np.where(inside, np.interp(lx, lc, ld), np.nan)

    if not valid.any():
        return f, None
    return f, (d.centers[valid].min(), d.centers[valid].max())


def collapse(curves, min_count=DEFAULT_MIN_COUNT) -> CollapseResult:
    """Quantify how well rescaled densities fall on one curve.

    Every curve is read off on a shared geometric grid spanning the common
    support of their well-populated bins (``counts >= min_count``), by
    log-log interpolation between geometric bin centers. At each grid point
    the spread is max - min of the natural-log densities; the score is the
    median spread. Identical curves score exactly 0.
    """
    curves = list(curves)
    if len(curves) < 2:
        raise ValueError("need at least 2 curves")
    interps, supports = zip(*(_loglog_interpolator(c, min_count) for c in curves))
    if any(s is None for s in supports):
        raise InsufficientDataError(f"a curve has no bin with >= {min_count} counts")
    lo = max(s[0] for s in supports)
    hi = min(s[1] for s in supports)
    if not lo <= hi:
        raise InsufficientDataError("curves share no common support")
    ratio = min(c.bin_ratio for c in curves)
    n = int(np.ceil(np.log(hi / lo) / np.log(ratio))) + 1
    grid = np.geomspace(lo, hi, n) if hi > lo else np.array([lo])
    logd = np.vstack([f(grid) for f in interps])
    usable = ~np.isnan(logd).any(axis=0)
    if not usable.any():
        raise InsufficientDataError("no grid point is covered by every curve")
    spread = logd[:, usable].max(axis=0) - logd[:, usable].min(axis=0)
    return CollapseResult(float(np.median(spread)), (float(lo), float(hi)), grid[usable], spread)


def collapse_score(curves, min_count=DEFAULT_MIN_COUNT) -> float:
    return collapse(curves, min_count).score


__all__ = [
    "IntervalSet",
    "LogBinnedDensity",
    "SizeCCDF",
    "RateEntry",
    "CollapseResult",
    "thresholded_intervals",
    "user_intervals",
    "per_user_intervals",
    "user_request_counts",
    "busiest_user",
    "geometric_edges",
    "log_binned_density",
    "rescale_density",
    "size_ccdf",
    "event_rate",
    "rate_table",
    "collapse",
    "collapse_score",
]
