"""Per-criterion PASS/FAIL summary for the acceptance suite.

Every test in test_acceptance.py carries an ``acceptance("ACn", "title")``
marker. Parametrized cases of one criterion roll up into a single line.
"""
from __future__ import annotations

import pytest

_criteria: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is None:
            continue
        label, title = mark.args
        entry = _criteria.setdefault(label, {"title": title, "nodes": set(), "failed": [], "seconds": 0.0})
        entry["nodes"].add(item.nodeid)


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid not in entry["nodes"]:
            continue
        entry["seconds"] += report.duration
        if report.failed or (report.when == "call" and report.skipped):
            entry["failed"].append(report.nodeid.split("::")[-1])
        elif report.when == "call":
            entry.setdefault("ran", set()).add(report.nodeid)


def _order(label: str) -> tuple[int, str]:
    digits = label[2:].rstrip("+")
    return (int(digits) if digits.isdigit() else 99, label)


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=_order):
        entry = _criteria[label]
        done = len(entry.get("ran", ())) == len(entry["nodes"]) and not entry["failed"]
        verdict = "PASS" if done else "FAIL"
        line = f"{verdict} {label:<5} {entry['title']} ({entry['seconds']:.2f}s)"
        if entry["failed"]:
            line += " failed: " + ", ".join(sorted(set(entry["failed"])))
        elif not done:
            line += " not run"
        terminalreporter.write_line(line)
