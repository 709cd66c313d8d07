import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Collect one summary line per acceptance criterion."""
    return _ACCEPTANCE.append


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
