import pytest

_VERDICTS: list[tuple[int, bool, str]] = []


@pytest.fixture
def verdict():
    """Record ``(criterion, passed, detail)``; the summary prints one line per criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        _VERDICTS.append((number, bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_VERDICTS):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
