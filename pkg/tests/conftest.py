import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record and print one pass/fail line for an acceptance criterion."""
    def _report(number, passed, detail):
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
