"""Shared fixtures; echoes acceptance lines in the terminal summary."""

import pytest

from dudenet.params import TABLE_I

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def table_i():
    return TABLE_I


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
