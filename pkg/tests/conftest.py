"""Shared fixtures and the per-criterion summary of the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(n)`` and may attach short
details with ``record_property("detail", ...)``. A criterion passes only if
every test carrying its mark passed; one line per criterion is printed at the
end of the run.
"""
from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_OUTCOMES: dict[int, list[tuple[str, bool, list[str]]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _OUTCOMES.setdefault(mark.args[0], []).append((item.name, rep.passed, details))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        runs = _OUTCOMES[n]
        ok = all(p for _, p, _ in runs)
        parts = []
        for name, passed, details in runs:
            tag = "" if passed else " [FAILED]"
            parts.append(f"{name}{tag}" + (": " + "; ".join(details) if details else ""))
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - " + " | ".join(parts))
