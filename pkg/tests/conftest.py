import pytest

_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line: ``record(key, ok, detail)``."""
    def _record(key, ok, detail):
        _LINES.append((key, bool(ok), detail))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key, ok, detail in sorted(_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
