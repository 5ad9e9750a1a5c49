import numpy as np
import pytest

GRID = np.round(np.arange(1, 10) / 10, 10)

_ACCEPTANCE: list[str] = []


def record(label: str, passed: bool, detail: str = "") -> None:
    line = f"{'PASS' if passed else 'FAIL'}  {label}"
    if detail:
        line += f"  [{detail}]"
    _ACCEPTANCE.append(line)
    print(line)


@pytest.fixture
def acceptance():
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20141015)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
