import numpy as np
import pytest

from u1slag.domain import BoundaryFunction, build_grid, unit_disc
from u1slag.scenarios import tuned
from u1slag.solver import solve_continuation

ACCEPTANCE = []


@pytest.fixture(scope="session")
def disc():
    return unit_disc()


@pytest.fixture(scope="session")
def grid05(disc):
    return build_grid(disc, 0.05)


@pytest.fixture(scope="session")
def grid025(disc):
    return build_grid(disc, 0.025)


@pytest.fixture(scope="session")
def grid10(disc):
    return build_grid(disc, 0.1)


@pytest.fixture(scope="session")
def cos2_singular(disc, grid05):
    phi = BoundaryFunction.trig(disc, cos=(0.0, 0.0, 1.0))
    return solve_continuation(grid05, phi)


@pytest.fixture(scope="session")
def tuned_k2(grid05):
    return tuned(grid05, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
