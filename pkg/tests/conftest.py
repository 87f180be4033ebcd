import pytest

_LINES = []


@pytest.fixture
def verdict_line():
    """Record and print the one-line PASS/FAIL summary of an acceptance check."""

    def emit(number, ok, text):
        line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {text}"
        _LINES.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
