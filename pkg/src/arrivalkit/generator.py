"""
N-stream renewal simulator with truncated-Pareto inter-arrival times.

Each stream draws intervals from the density

    p(x) = k x**(-1-k) / (a**-k - b**-k),    a <= x <= b

and every stream starts with a renewal at t = 0. Arrivals falling in
``[warmup, warmup + horizon)`` are emitted, shifted so that the end of the
warm-up is time zero.

Randomness is split per stream: stream ``i`` uses
``SeedSequence(seed, spawn_key=(0, i))`` and size attachment uses
``SeedSequence(seed, spawn_key=(1,))``. A stream's arrivals therefore depend
only on ``(seed, i)``, whatever the number of streams or the order they are
generated in.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .ingest import EventLog

YEAR = 365 * 86400
DEFAULT_K = 0.3
DEFAULT_A = 2.5
DEFAULT_B = 2.524e8  # about 8 years
DEFAULT_STREAMS = 1000

_STREAM_KEY = 0
_SIZE_KEY = 1
_CHUNK = 64


def _check_pareto(k, a, b):
    if not k > 0:
        raise ValueError(f"k must be > 0, got {k}")
    if not (1 <= a <= b):
        raise ValueError(f"need 1 <= a <= b, got a={a}, b={b}")


def pareto_inverse_cdf(u, k, a, b):
    """Quantile function of the truncated Pareto; maps u=0 to a and u=1 to b."""
    _check_pareto(k, a, b)
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    lo, hi = a**-k, b**-k
    x = (lo - u * (lo - hi)) ** (-1.0 / k)
    # pin the endpoints against rounding
    x = np.clip(x, a, b)
    return x if x.ndim else float(x)


def pareto_cdf(x, k, a, b):
    _check_pareto(k, a, b)
    x = np.clip(np.asarray(x, dtype=np.float64), a, b)
    if a == b:
        return np.ones_like(x) if x.ndim else 1.0
    F = (a**-k - x**-k) / (a**-k - b**-k)
    return F if F.ndim else float(F)


def pareto_mean(k, a, b):
    """Closed-form mean of the truncated Pareto on [a, b]."""
    _check_pareto(k, a, b)
    if a == b:
        return float(a)
    if k == 1:
        return float(np.log(b / a) / (1 / a - 1 / b))
    num = b ** (1 - k) - a ** (1 - k)
    den = a**-k - b**-k
    return float(k / (1 - k) * num / den)


@dataclass(frozen=True)
class SizeModel:
    s_star: float
    gamma_minus_1: float

    def __post_init__(self):
        if not (self.s_star > 0 and self.gamma_minus_1 > 0):
            raise ValueError("size model needs s_star > 0 and gamma_minus_1 > 0")

    def ccdf(self, s):
        return (1 + np.asarray(s, dtype=np.float64) / self.s_star) ** -self.gamma_minus_1


def sample_q_exponential_size(u, s_star, gamma_minus_1):
    """Invert the CCDF (1 + s/S*)**-(gamma-1); returns integer bytes."""
    SizeModel(s_star, gamma_minus_1)
    u = np.asarray(u, dtype=np.float64)
    if np.any((u <= 0) | (u > 1)):
        raise ValueError("u must lie in (0, 1]")
    s = np.rint(s_star * (u ** (-1.0 / gamma_minus_1) - 1.0)).astype(np.int64)
    return s if s.ndim else int(s)


@dataclass
class GeneratorConfig:
    n_streams: int = DEFAULT_STREAMS
    k: float = DEFAULT_K
    a: float = DEFAULT_A
    b: float = DEFAULT_B
    warmup: float = 5.0 * YEAR
    horizon: float = 1.0 * YEAR
    seed: int = 0
    size_model: Optional[SizeModel] = None
    integer_timestamps: bool = True

    def __post_init__(self):
        if isinstance(self.size_model, dict):
            self.size_model = SizeModel(**self.size_model)
        self.validate()

    def validate(self):
        _check_pareto(self.k, self.a, self.b)
        if self.n_streams < 1:
            raise ValueError("n_streams must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def stream_rng(seed, stream_id):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_KEY, stream_id)))


@dataclass
class StreamState:
    """Scheduling state of one renewal stream.

    Intervals are drawn ``_CHUNK`` at a time and consumed one per arrival.
    """

    stream_id: int
    k: float
    a: float
    b: float
    rng: np.random.Generator = field(repr=False)
    next_arrival: float = 0.0
    _buf: np.ndarray = field(default=None, repr=False)
    _pos: int = 0

    @classmethod
    def start(cls, config: GeneratorConfig, stream_id) -> "StreamState":
        st = cls(stream_id, config.k, config.a, config.b, stream_rng(config.seed, stream_id))
        st.next_arrival = st._draw()
        return st

    def _draw(self):
        if self._buf is None or self._pos == len(self._buf):
            self._buf = pareto_inverse_cdf(self.rng.random(_CHUNK), self.k, self.a, self.b)
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def advance(self):
        self.next_arrival += self._draw()
        return self.next_arrival


def simulate_arrivals(config: GeneratorConfig):
    """Raw arrival times (float seconds, unshifted) and stream ids in the window.

    A heap keyed on (next arrival, stream id) sweeps all streams in
    nondecreasing time order.
    """
    start, end = config.warmup, config.warmup + config.horizon
    states = [StreamState.start(config, i) for i in range(config.n_streams)]
    heap = [(st.next_arrival, st.stream_id) for st in states]
    heapq.heapify(heap)
    times, ids = [], []
    while heap:
        t, i = heap[0]
        if t >= end:
            break
        if t >= start:
            times.append(t)
            ids.append(i)
        heapq.heapreplace(heap, (states[i].advance(), i))
    return np.array(times, dtype=np.float64), np.array(ids, dtype=np.int64)


def simulate(config: GeneratorConfig) -> EventLog:
    """Run the generator and return the recorded window as an EventLog.

    Timestamps are floored to whole seconds unless
    ``config.integer_timestamps`` is False.
    """
    t, ids = simulate_arrivals(config)
    t = t - config.warmup
    if config.integer_timestamps:
        t = np.floor(t).astype(np.int64)
    n = len(t)
    log = EventLog(
        t,
        np.array([str(i) for i in ids.tolist()], dtype=object),
        np.zeros(n, dtype=np.int64),
        np.full(n, "simulated", dtype=object),
        presorted=True,
    )
    if config.size_model is not None:
        log = attach_sizes(log, config.size_model, config.seed)
    return log


def attach_sizes(log: EventLog, size_model, seed) -> EventLog:
    """Give every event an i.i.d. q-exponential size; timestamps untouched.

    Sizes are independent of the arrival process. This is a modeling
    convenience for exercising threshold analyses on simulated traces.
    """
    if isinstance(size_model, dict):
        size_model = SizeModel(**size_model)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SIZE_KEY,)))
    u = 1.0 - rng.random(len(log))  # (0, 1]
    sizes = sample_q_exponential_size(u, size_model.s_star, size_model.gamma_minus_1)
    return EventLog(log.timestamps, log.users, np.atleast_1d(sizes), log.printers, presorted=True)


def expected_event_count(config: GeneratorConfig):
    """Stationary-rate estimate horizon * n_streams / mean interval."""
    return config.horizon * config.n_streams / pareto_mean(config.k, config.a, config.b)


__all__ = [
    "YEAR",
    "GeneratorConfig",
    "SizeModel",
    "StreamState",
    "pareto_inverse_cdf",
    "pareto_cdf",
    "pareto_mean",
    "sample_q_exponential_size",
    "simulate",
    "simulate_arrivals",
    "attach_sizes",
    "stream_rng",
    "expected_event_count",
]
