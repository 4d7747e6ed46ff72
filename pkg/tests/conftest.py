import zlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria = {}


@pytest.fixture
def rng(request):
    # one seed per test so failures reproduce in isolation
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


@pytest.fixture
def note(request):
    """Attach a one-line detail to an acceptance criterion's summary line."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    num = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
    details = [v for k, v in report.user_properties if k == "detail"]
    _criteria[num] = (report.outcome, "; ".join(details))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        outcome, detail = _criteria[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num}: {status}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
