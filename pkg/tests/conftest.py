"""Acceptance bookkeeping: one PASS/FAIL line per numbered criterion."""
import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_outcomes: dict[int, list[bool]] = defaultdict(list)
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _titles[m.args[0]] = m.args[1]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for n, title in _titles.items():
        if f"criterion_{n:02d}" in report.nodeid:
            _outcomes[n].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_titles):
        res = _outcomes.get(n)
        status = "NOT RUN" if not res else ("PASS" if all(res) else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {_titles[n]}")
