"""Shared pytest hooks: acceptance verdict lines in the terminal summary."""
import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Callable ``report(n, passed, detail)`` recording one verdict line."""
    def report(n, passed, detail):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
