"""Shared fixtures and the acceptance-criteria report."""

from __future__ import annotations

CRITERIA_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    CRITERIA_RESULTS.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, name, passed, detail in sorted(CRITERIA_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        suffix = f" — {detail}" if detail else ""
        terminalreporter.write_line(f"[criterion {number:>2}] {verdict}: {name}{suffix}")
