import pytest

_acceptance_lines: list[str] = []


@pytest.fixture
def acceptance():
    """Record a pass/fail line for one acceptance criterion, then assert it."""

    def check(number: int, name: str, passed: bool, detail: str = ""):
        verdict = "PASS" if passed else "FAIL"
        line = f"ACCEPTANCE {number} {name}: {verdict}"
        if detail:
            line += f" ({detail})"
        _acceptance_lines.append(line)
        print(line)
        assert passed, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
