import numpy as np
import pytest

from roughmorrey.grid import dyadic_family, make_grid


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 1.0, 2.0**-6)


@pytest.fixture(scope="session")
def family1(grid1):
    return dyadic_family(grid1, stride=4)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 1.0, 2.0**-3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
