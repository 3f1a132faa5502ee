"""Collects the acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_results: dict[str, tuple[str, str]] = {}
_details: dict[str, list[str]] = {}


@pytest.fixture
def report(request):
    """Append measured values for the acceptance summary line."""
    lines = _details.setdefault(request.node.nodeid, [])
    return lines.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    crit = report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results[report.nodeid] = (crit, "PASS" if report.outcome == "passed" else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (name, outcome) in sorted(_results.items(), key=lambda kv: kv[1][0]):
        detail = "; ".join(_details.get(nodeid, []))
        terminalreporter.write_line(f"{outcome}  {name}" + (f"  [{detail}]" if detail else ""))
