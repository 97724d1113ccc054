import pytest

CRITERION_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def criterion_lines():
    return CRITERION_LINES


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end; captured prints are hidden for passing tests."""
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERION_LINES):
            terminalreporter.write_line(CRITERION_LINES[k])
