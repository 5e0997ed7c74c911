import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion and assert it."""

    def report(number, passed, message):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {message}"
        print(line)
        _LINES.append(line)
        assert passed, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
