import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Collect one PASS/FAIL line per acceptance criterion."""

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] AC{number:>2} {title}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("AC")[1].split()[0])):
        terminalreporter.write_line(line)
