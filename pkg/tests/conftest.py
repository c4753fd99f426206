"""Prints one pass/fail line per acceptance criterion at the end of the run."""
import re

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    note = dict(report.user_properties).get("summary", "")
    _RESULTS[int(m[1])] = ("PASS" if report.passed else "FAIL", note)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        status, note = _RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {note}".rstrip())
