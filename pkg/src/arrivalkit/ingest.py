"""
Reading, filtering and summarizing request traces.

The canonical trace is a UTF-8 CSV file with the header
``timestamp,user,size,printer`` and one request per line::

    timestamp,user,size,printer
    1041379200,alice,182044,chrome
    1041379207,bob,5121,chrome

``timestamp`` is integer Unix seconds, ``size`` is integer bytes. Rows may
appear in any order; the parsed log is stably sorted by timestamp, so rows
sharing a timestamp keep their file order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import EmptyLogError, InsufficientDataError, ParseError

HEADER = ("timestamp", "user", "size", "printer")


@dataclass(frozen=True)
class PrintEvent:
    timestamp: int
    user: str
    size: int
    printer: str

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if self.size < 0:
            raise ValueError("size must be >= 0")
        if not self.user:
            raise ValueError("user must be nonempty")


class EventLog:
    """A time-sorted trace held as parallel numpy arrays.

    ``timestamps`` is int64 for parsed traces. The generator's sub-second
    mode produces float64 timestamps; every analysis accepts either.
    """

    def __init__(self, timestamps, users, sizes, printers, *, presorted=False):
        timestamps = np.asarray(timestamps)
        if timestamps.dtype.kind not in "iuf":
            raise TypeError("timestamps must be numeric")
        users = np.asarray(users, dtype=object)
        sizes = np.asarray(sizes, dtype=np.int64)
        printers = np.asarray(printers, dtype=object)
        n = len(timestamps)
        if not (len(users) == len(sizes) == len(printers) == n):
            raise ValueError("field arrays must have equal length")
        if not presorted:
            order = np.argsort(timestamps, kind="stable")
            timestamps, users = timestamps[order], users[order]
            sizes, printers = sizes[order], printers[order]
        elif n > 1 and np.any(np.diff(timestamps) < 0):
            raise ValueError("presorted=True but timestamps decrease")
        self.timestamps = timestamps
        self.users = users
        self.sizes = sizes
        self.printers = printers
        for arr in (self.timestamps, self.users, self.sizes, self.printers):
            arr.flags.writeable = False

    @classmethod
    def from_events(cls, events: Iterable[PrintEvent]) -> "EventLog":
        events = list(events)
        return cls(
            np.array([e.timestamp for e in events], dtype=np.int64),
            [e.user for e in events],
            [e.size for e in events],
            [e.printer for e in events],
        )

    def __len__(self):
        return len(self.timestamps)

    def __iter__(self) -> Iterator[PrintEvent]:
        return iter(self.events)

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.sizes, other.sizes)
            and list(self.users) == list(other.users)
            and list(self.printers) == list(other.printers)
        )

    def __repr__(self):
        return f"EventLog(n={len(self)}, span={self.span})"

    @property
    def events(self) -> list[PrintEvent]:
        return [
            PrintEvent(t.item(), u, int(s), p)
            for t, u, s, p in zip(self.timestamps, self.users, self.sizes, self.printers)
        ]

    @property
    def span(self):
        """Record duration T = last timestamp - first timestamp."""
        if len(self) == 0:
            return 0
        return (self.timestamps[-1] - self.timestamps[0]).item()

    def subset(self, mask) -> "EventLog":
        return EventLog(
            self.timestamps[mask],
            self.users[mask],
            self.sizes[mask],
            self.printers[mask],
            presorted=True,
        )


@dataclass(frozen=True)
class SummaryStats:
    n_users: int
    n_users_gt3: int
    n_requests: int
    mean_size: float
    mean_interval: float
    min_resolution: Optional[float]

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _parse_int(field, name, lineno):
    try:
        value = int(field)
    except ValueError:
        raise ParseError(f"{name} {field!r} is not an integer", lineno) from None
    if value < 0:
        raise ParseError(f"{name} {value} is negative", lineno)
    return value


def parse_log(text) -> EventLog:
    """Parse a canonical CSV trace from a string or text stream."""
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyLogError("trace is empty (no header)") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(f"expected header {','.join(HEADER)}, got {','.join(header)}", 1)

    ts, users, sizes, printers = [], [], [], []
    for row in reader:
        lineno = reader.line_num
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
        t = _parse_int(row[0].strip(), "timestamp", lineno)
        s = _parse_int(row[2].strip(), "size", lineno)
        user = row[1].strip()
        if not user:
            raise ParseError("empty user", lineno)
        ts.append(t)
        users.append(user)
        sizes.append(s)
        printers.append(row[3].strip())
    if not ts:
        raise EmptyLogError("trace has a header but no events")
    return EventLog(np.array(ts, dtype=np.int64), users, sizes, printers)


def read_log(path) -> EventLog:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_log(fh)


def serialize_log(log: EventLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    if log.timestamps.dtype.kind == "f":
        stamps = [repr(float(t)) for t in log.timestamps]
    else:
        stamps = [str(int(t)) for t in log.timestamps]
    for t, u, s, p in zip(stamps, log.users, log.sizes, log.printers):
        writer.writerow((t, u, int(s), p))
    return buf.getvalue()


def write_log(log: EventLog, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(serialize_log(log))


def filter_events(log: EventLog, printer=None, t_min=None, t_max=None, min_size=0) -> EventLog:
    """Keep events matching every given predicate.

    The size predicate is strict: only events with ``size > min_size``
    survive, so the default drops zero-byte requests.
    """
    if t_min is not None and t_max is not None and t_min > t_max:
        raise ValueError("t_min must not exceed t_max")
    mask = log.sizes > min_size
    if printer is not None:
        mask &= log.printers == printer
    if t_min is not None:
        mask &= log.timestamps >= t_min
    if t_max is not None:
        mask &= log.timestamps <= t_max
    return log.subset(mask)


def summarize(log: EventLog) -> SummaryStats:
    n = len(log)
    if n < 2:
        raise InsufficientDataError(f"summary needs at least 2 events, got {n}")
    _, per_user = np.unique(log.users.astype(str), return_counts=True)
    gaps = np.diff(log.timestamps)
    positive = gaps[gaps > 0]
    return SummaryStats(
        n_users=int(len(per_user)),
        n_users_gt3=int(np.sum(per_user > 3)),
        n_requests=n,
        mean_size=float(np.mean(log.sizes)),
        mean_interval=float(log.span / (n - 1)),
        min_resolution=float(positive.min()) if len(positive) else None,
    )


def file_digest(path, algorithm="sha256"):
    import hashlib

    h = hashlib.new(algorithm)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return f"{algorithm}:{h.hexdigest()}"


__all__ = [
    "HEADER",
    "PrintEvent",
    "EventLog",
    "SummaryStats",
    "parse_log",
    "read_log",
    "serialize_log",
    "write_log",
    "filter_events",
    "summarize",
    "file_digest",
]

