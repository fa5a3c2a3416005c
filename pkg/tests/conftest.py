"""Shared test plumbing: an end-of-run summary for the acceptance checks."""

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance_line(request):
    """Record one pass/fail line, echo it, and enforce it."""

    def record(ok, text):
        line = f"{'PASS' if ok else 'FAIL'}  {text}"
        request.config._acceptance_lines.append(line)
        print(line)
        assert ok, text

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance summary")
        for line in lines:
            terminalreporter.write_line(line)
