import pytest

# (criterion number, description, passed, detail) appended by test_acceptance
ACCEPTANCE = []


@pytest.fixture
def criterion():
    def record(number, description, passed, detail=""):
        ACCEPTANCE.append((number, description, bool(passed), detail))
        assert passed, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {description} {detail}".rstrip())
