"""Shared pytest hooks: acceptance criteria get a one-line PASS/FAIL summary."""

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    skipped = report.skipped
    if report.when == "call" or failed or skipped:
        prev = _results.get(number, (title, "PASS"))[1]
        if failed:
            status = "FAIL"
        elif skipped:
            status = "SKIP" if prev == "PASS" else prev
        else:
            status = prev
        _results[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, status = _results[number]
        terminalreporter.write_line(f"{status}  criterion {number:>2}: {title}")
