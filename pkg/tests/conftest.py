import math

import mpmath
import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


def q_oracle(x: float) -> float:
    """Gaussian tail via mpmath, independent of the scipy path under test."""
    return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary prints at session end."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        prev = _CRITERIA.get(number)
        ok = passed and (prev is None or prev[1])
        _CRITERIA[number] = (title, ok, detail if prev is None else f"{prev[2]}; {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {detail}")


def isclose(a, b, tol):
    return math.isfinite(a) and abs(a - b) <= tol
