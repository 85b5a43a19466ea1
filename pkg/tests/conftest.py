import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion; the line is printed at the end of the run."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_LINES):
            terminalreporter.write_line(_LINES[number])
