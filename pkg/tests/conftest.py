import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record and print one ``PASS``/``FAIL`` line, then assert on it."""

    def report(number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number} ({title})" + (f": {detail}" if detail else "")
        _LINES.append((number, line))
        print(line)
        assert passed, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
