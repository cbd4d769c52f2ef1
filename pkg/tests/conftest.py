"""Per-criterion PASS/FAIL lines for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n, "title")`` contribute to criterion
``n``; a criterion passes when all of its tests pass.  Tests may attach
measured values through the ``detail`` fixture.
"""

import pytest

_OUTCOMES: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.fixture
def detail(request):
    def add(text: str) -> None:
        request.node.user_properties.append(("detail", text))
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    n, title = marker.args
    entry = _OUTCOMES.setdefault(n, {"title": title, "passed": True, "details": []})
    entry["passed"] &= not report.failed
    if report.when == "call":
        entry["details"] += [v for k, v in item.user_properties if k == "detail"]
        if report.failed:
            entry["details"].append(f"{item.name} failed")


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        e = _OUTCOMES[n]
        status = "PASS" if e["passed"] else "FAIL"
        line = f"[{status}] {n}. {e['title']}"
        if e["details"]:
            line += ": " + "; ".join(e["details"])
        terminalreporter.write_line(line)
