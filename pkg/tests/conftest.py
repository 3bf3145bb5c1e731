from __future__ import annotations

import pytest

_results: dict[int, tuple[str, str, list[str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    details = [str(v) for k, v in item.user_properties if k == "detail"]
    status = "PASS" if report.passed else "FAIL"
    previous = _results.get(number)
    if previous is None or previous[0] == "PASS":
        _results[number] = (status, title, details)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, title, details = _results[number]
        line = f"criterion {number} {status}: {title}"
        if details:
            line += " [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
