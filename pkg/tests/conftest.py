import numpy as np
import pytest

from gwtrees.offspring import builtin


@pytest.fixture
def geo():
    return builtin("geometric", 0.5)


@pytest.fixture
def binary():
    return builtin("binary")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one summary line per acceptance criterion

_CRITERIA: dict[str, dict] = {}


@pytest.fixture
def criterion(request):
    """Record measured values for the acceptance summary line."""
    entry = {"title": request.node.function.__doc__.strip().splitlines()[0], "details": []}
    _CRITERIA[request.node.nodeid] = entry
    return entry["details"]


def pytest_runtest_logreport(report):
    if report.when == "call" and report.nodeid in _CRITERIA:
        _CRITERIA[report.nodeid]["outcome"] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for entry in _CRITERIA.values():
        status = "PASS" if entry.get("outcome") == "passed" else "FAIL"
        details = "; ".join(entry["details"])
        tr.write_line(f"{status}  {entry['title']}" + (f"  [{details}]" if details else ""))
