import numpy as np
import pytest

from arrivalkit.ingest import EventLog

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    def record(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_log(times, sizes=None, users=None, printers=None):
    n = len(times)
    sizes = [1] * n if sizes is None else sizes
    users = ["u"] * n if users is None else users
    printers = ["chrome"] * n if printers is None else printers
    return EventLog(np.asarray(times, dtype=np.int64), users, sizes, printers)
