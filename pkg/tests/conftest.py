import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one status line per acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}"
        assert ok, _ACCEPTANCE[number]

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
