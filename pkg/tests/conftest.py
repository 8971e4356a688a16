import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> [title, passed, failing test ids]
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _CRITERIA.setdefault(number, [title, True, []])
    if report.failed:
        entry[1] = False
        entry[2].append(report.head_line or report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, failed = _CRITERIA[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
