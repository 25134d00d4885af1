import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion verified by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args[0]


_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = getattr(report, "criterion", None)
    if name is None or (report.when != "call" and report.passed):
        return
    # a failing setup or teardown is not masked by a later passing phase
    if _CRITERIA.get(name, ("PASS",))[0] == "FAIL":
        return
    detail = dict(report.user_properties).get("measured", "")
    _CRITERIA[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    width = max(len(n) for n in _CRITERIA)
    for name, (status, detail) in _CRITERIA.items():
        terminalreporter.write_line(f"{status}  {name:<{width}}  {detail}".rstrip())
