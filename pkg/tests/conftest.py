import pytest

# (criterion, verdict, detail) lines collected by the acceptance tests
ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def record():
    """Call as ``record(name, ok, detail)``; ``ok=None`` marks a skip."""

    def _record(name: str, ok, detail: str = "") -> None:
        verdict = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        ACCEPTANCE.append((name, verdict, detail))
        print(f"{verdict} {name}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{verdict} {name}: {detail}")
