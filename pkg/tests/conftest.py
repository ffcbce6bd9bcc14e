import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the test still asserts on ``ok``."""
    def record(criterion, ok, detail=""):
        _VERDICTS.append((criterion, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, ok, detail in _VERDICTS:
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {crit}: {detail}")
