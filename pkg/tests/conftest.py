import numpy as np
import pytest

from complementarity import LossSpec

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        callspec = getattr(item, "callspec", None)
        case = f" [{callspec.id}]" if callspec else ""
        _CRITERIA.append((marker.args[0], marker.args[1] + case, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, outcome in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {cid}: {text}")


@pytest.fixture
def grid():
    return np.linspace(0.0, 1.0, 51)


@pytest.fixture
def fig_inside():
    return LossSpec.inside(0.0, 0.5)


@pytest.fixture
def fig_outside():
    return LossSpec.outside(0.0, 0.5)
