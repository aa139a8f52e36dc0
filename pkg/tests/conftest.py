import mpmath as mp
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _precision():
    saved = mp.mp.dps
    mp.mp.dps = 64
    yield
    mp.mp.dps = saved


@pytest.fixture
def acceptance_line():
    """Record a one-line PASS/FAIL verdict; printed in the terminal summary."""

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
