import numpy as np
import pytest

from htype_lab.algebra import build_htype_group
from htype_lab.littlewood_paley import build_window


@pytest.fixture(scope="session")
def g22():
    return build_htype_group(2, 2)


@pytest.fixture(scope="session")
def g32():
    return build_htype_group(3, 2)


@pytest.fixture(scope="session")
def window():
    return build_window()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
