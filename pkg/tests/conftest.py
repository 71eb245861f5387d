from pathlib import Path

import pytest

from miocheck import make_mio, parse

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES = []


def load(name):
    return parse((DATA / name).read_text(encoding="utf-8"))


@pytest.fixture
def exchange():
    doc = load("exchange.mio")
    return doc.get("S"), doc.get("T")


@pytest.fixture
def single():
    return make_mio("U", "u0")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[1])):
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, label = marker.args
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number:>2} {status}  {label}")
