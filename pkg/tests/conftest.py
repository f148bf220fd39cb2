import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}
_DETAILS = {}


@pytest.fixture
def report(request):
    """Attach a one-line detail to the acceptance summary of the running test."""
    def add(text):
        _DETAILS.setdefault(request.node.nodeid, []).append(str(text))
    return add


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2), report.nodeid)
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[key] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name, nodeid), status in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {num:2d} {status}  {name}")
        for line in _DETAILS.get(nodeid, []):
            terminalreporter.write_line(f"              {line}")
