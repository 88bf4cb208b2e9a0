import time

import pytest

from published import ALL_ROWS
from nonuniform_be.optimizer import optimize


@pytest.fixture(scope="session")
def optimized_table():
    """Optimizer output for every published t at the default 0.001 steps, plus wall time."""
    start = time.perf_counter()
    results = {row.t: optimize(row.t) for row in ALL_ROWS}
    return results, time.perf_counter() - start


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    """Record one PASS/FAIL summary line; printed at the end of the run."""

    def record(criterion: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
