"""Shared pytest configuration: acceptance summary lines and hypothesis profile."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "mgdetect",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mgdetect")

# criterion label -> outcome, filled by the makereport hook below
_ACCEPTANCE: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): marks a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "setup" and report.skipped:
        _ACCEPTANCE[label] = "SKIP"
    elif report.when == "call":
        _ACCEPTANCE[label] = "PASS" if report.passed else "FAIL"


def _criterion_order(label: str) -> int:
    head = label.split(" ", 1)[0].rstrip(":.")
    return int(head) if head.isdigit() else 99


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=_criterion_order):
        terminalreporter.write_line(f"[{_ACCEPTANCE[label]}] {label}")
