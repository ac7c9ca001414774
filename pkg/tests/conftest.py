import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line; returns the passed flag so the test can assert it."""

    def record(number: int, ok: bool, summary: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {summary}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
