import pytest

from wallcross.modular import build_context

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ctx():
    return build_context(24)


@pytest.fixture(scope="session")
def ctx16():
    return build_context(16)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
