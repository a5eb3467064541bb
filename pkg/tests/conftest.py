import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(number: int, name: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
