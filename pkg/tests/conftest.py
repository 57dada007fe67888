import warnings

import numpy as np
import pytest

from syndeco.core import ChannelSpace
from syndeco.projection import NonUniqueProjectionWarning

_ACCEPTANCE = []


def pytest_configure(config):
    warnings.filterwarnings("ignore", category=NonUniqueProjectionWarning)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    status = "PASS" if report.passed else "FAIL"
    _ACCEPTANCE.append((marker.kwargs.get("criterion"), item.name, status, marker.kwargs.get("title", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    by_criterion = {}
    for criterion, name, status, title in _ACCEPTANCE:
        entry = by_criterion.setdefault(criterion, {"title": title, "failed": []})
        if status == "FAIL":
            entry["failed"].append(name)
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(by_criterion):
        entry = by_criterion[criterion]
        status = "FAIL" if entry["failed"] else "PASS"
        detail = f"  (failed: {', '.join(entry['failed'])})" if entry["failed"] else ""
        terminalreporter.write_line(f"criterion {criterion:>2}  {status}  {entry['title']}{detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def binary2():
    return ChannelSpace((2, 2), 2)


@pytest.fixture
def binary3():
    return ChannelSpace((2, 2, 2), 2)
