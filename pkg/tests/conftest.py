"""Acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary."""
from __future__ import annotations

import pytest

ACCEPTANCE: dict[int, dict] = {}


def _entry(marker) -> dict:
    n, title = marker.args
    return ACCEPTANCE.setdefault(n, {"title": title, "details": [], "outcome": None})


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.fixture
def note(request):
    """Append a measured value to the criterion's summary line."""
    marker = request.node.get_closest_marker("acceptance")
    return _entry(marker)["details"].append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    entry = _entry(marker)
    if entry["outcome"] != "FAIL":
        entry["outcome"] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        e = ACCEPTANCE[n]
        status = e["outcome"] or "NOT RUN"
        line = f"criterion {n:2d} {status:4s}  {e['title']}"
        if e["details"]:
            line += " | " + "; ".join(e["details"])
        tr.write_line(line)
