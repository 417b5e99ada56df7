import pytest

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def record():
    def _record(number, passed, detail):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {status}  {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
