import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one summary line per acceptance criterion: criterion(n, ok, text)."""

    def record(number: int, ok: bool, text: str) -> None:
        _LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_LINES):
            terminalreporter.write_line(_LINES[number])
