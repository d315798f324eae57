import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrivalkit.errors import EmptyLogError, InsufficientDataError, ParseError
from arrivalkit.ingest import (
    EventLog,
    PrintEvent,
    filter_events,
    parse_log,
    read_log,
    serialize_log,
    summarize,
    write_log,
)

from conftest import make_log

HEADER = "timestamp,user,size,printer\n"


def test_parse_sorts_by_timestamp():
    log = parse_log(HEADER + "10,a,1,chrome\n5,b,2,chrome\n20,c,3,chrome\n")
    assert log.timestamps.tolist() == [5, 10, 20]
    assert log.users.tolist() == ["b", "a", "c"]


def test_parse_keeps_file_order_on_ties():
    log = parse_log(HEADER + "7,x,1,p\n3,y,1,p\n7,z,1,p\n7,w,1,p\n")
    assert log.users.tolist() == ["y", "x", "z", "w"]


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("abc,u1,100,chrome", "timestamp"),
        ("10,u1,1.5,chrome", "size"),
        ("10,u1,-4,chrome", "negative"),
        ("-1,u1,4,chrome", "negative"),
        ("10,u1,4", "4 fields"),
        ("10,u1,4,chrome,extra", "4 fields"),
        ("10,,4,chrome", "user"),
    ],
)
def test_parse_error_cites_line(line, fragment):
    text = HEADER + "1,ok,1,chrome\n" + line + "\n"
    with pytest.raises(ParseError) as info:
        parse_log(text)
    assert info.value.line == 3
    assert "line 3" in str(info.value)
    assert fragment in str(info.value)


def test_missing_header():
    with pytest.raises(ParseError):
        parse_log("1,a,1,chrome\n")


def test_empty_after_header():
    with pytest.raises(EmptyLogError):
        parse_log(HEADER)
    with pytest.raises(EmptyLogError):
        parse_log("")


def test_print_event_validation():
    with pytest.raises(ValueError):
        PrintEvent(-1, "u", 0, "p")
    with pytest.raises(ValueError):
        PrintEvent(0, "", 0, "p")
    with pytest.raises(ValueError):
        PrintEvent(0, "u", -2, "p")


def test_events_view_and_span():
    log = make_log([3, 9, 14], sizes=[1, 2, 3])
    assert [e.timestamp for e in log.events] == [3, 9, 14]
    assert log.events[1] == PrintEvent(9, "u", 2, "chrome")
    assert log.span == 11
    assert make_log([5, 5]).span == 0


def test_file_round_trip(tmp_path):
    log = make_log([1, 2, 2, 50], sizes=[0, 10, 20, 5], users=["a", "b", "a", "c"])
    path = tmp_path / "t.csv"
    write_log(log, path)
    assert read_log(path) == log


events = st.lists(
    st.tuples(
        st.integers(0, 2**40),
        st.text(alphabet="abcdefgh,\" _-", min_size=1, max_size=6).filter(lambda s: s.strip() == s and s),
        st.integers(0, 2**40),
        st.sampled_from(["chrome", "lab 2", "x,y"]),
    ),
    min_size=1,
    max_size=40,
)


@given(events)
@settings(max_examples=100)
def test_serialize_parse_identity(rows):
    log = EventLog.from_events(PrintEvent(*r) for r in rows)
    assert parse_log(serialize_log(log)) == log


def test_filter_printer():
    log = make_log([1, 2, 3, 4], printers=["chrome", "ink", "chrome", "ink"])
    out = filter_events(log, printer="chrome")
    assert out.timestamps.tolist() == [1, 3]
    assert set(out.printers) == {"chrome"}


def test_filter_strict_size():
    log = make_log([1, 2, 3], sizes=[0, 5, 0])
    assert filter_events(log).timestamps.tolist() == [2]
    assert len(filter_events(log, min_size=5)) == 0


def test_filter_time_point():
    log = make_log([1, 5, 5, 9])
    assert filter_events(log, t_min=5, t_max=5).timestamps.tolist() == [5, 5]
    with pytest.raises(ValueError):
        filter_events(log, t_min=6, t_max=5)


@given(
    st.lists(st.tuples(st.integers(0, 1000), st.integers(0, 50), st.sampled_from("ab")), min_size=1, max_size=60),
    st.integers(-1, 50),
    st.one_of(st.none(), st.integers(0, 1000)),
)
def test_filter_idempotent(rows, min_size, t_min):
    log = make_log([r[0] for r in rows], sizes=[r[1] for r in rows], printers=[r[2] for r in rows])
    once = filter_events(log, printer="a", t_min=t_min, min_size=min_size)
    assert filter_events(once, printer="a", t_min=t_min, min_size=min_size) == once


def test_summarize_hand_example():
    s = summarize(make_log([0, 60, 120], sizes=[1000, 2000, 3000]))
    assert s.n_requests == 3
    assert s.mean_size == 2000
    assert s.mean_interval == 60
    assert s.min_resolution == 60


def test_summarize_users():
    users = ["a"] * 5 + ["b"] * 4 + ["c"] * 3
    s = summarize(make_log(list(range(12)), users=users))
    assert (s.n_users, s.n_users_gt3, s.n_requests) == (3, 2, 12)
    assert s.min_resolution == 1


def test_summarize_needs_two_events():
    with pytest.raises(InsufficientDataError):
        summarize(make_log([7]))


def test_summary_json_keys():
    d = json.loads(summarize(make_log([0, 3, 9])).to_json())
    assert set(d) == {"n_users", "n_users_gt3", "n_requests", "mean_size", "mean_interval", "min_resolution"}


@given(st.lists(st.integers(0, 10**9), min_size=2, max_size=200))
def test_mean_interval_times_gaps_is_span(times):
    log = make_log(times)
    s = summarize(log)
    assert math.isclose(s.mean_interval * (s.n_requests - 1), log.span, rel_tol=1e-12, abs_tol=1e-9)
    assert s.n_users_gt3 <= s.n_users <= s.n_requests
