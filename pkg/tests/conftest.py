"""Collects the one-line acceptance verdicts and prints them after the run."""
import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    def record(number: int, ok: bool, detail: str) -> bool:
        VERDICTS.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(VERDICTS[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in sorted(VERDICTS, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
