from __future__ import annotations

from pathlib import Path

import pytest

from lattice_pdr.io import bundled_model

GOLDEN = Path(__file__).parent / "golden"

# pass/fail lines of the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fig1():
    return bundled_model("fig1.ts")


@pytest.fixture(scope="session")
def example3():
    return bundled_model("example3.mdp")


@pytest.fixture(scope="session")
def example6():
    return bundled_model("example6.mdp")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
