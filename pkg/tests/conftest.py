import numpy as np
import pytest

from warpsoliton.config import DEFAULT_CONFIG
from warpsoliton.ground_state import shoot_ground_state, solve_ground_state
from warpsoliton.linearized import RadialGrid
from warpsoliton.stability import compute_Qhat1, expansion_constants


@pytest.fixture(scope="session")
def gs25():
    return solve_ground_state(n_max=25)


@pytest.fixture(scope="session")
def gs60():
    return solve_ground_state(n_max=DEFAULT_CONFIG.n_max_refined)


@pytest.fixture(scope="session")
def shot():
    return shoot_ground_state(2, 3.0)


@pytest.fixture(scope="session")
def grid():
    return RadialGrid.from_config(DEFAULT_CONFIG)


@pytest.fixture(scope="session")
def Qgrid(grid, gs60):
    return grid.sample(gs60)


@pytest.fixture(scope="session")
def profiles():
    return compute_Qhat1(DEFAULT_CONFIG)


@pytest.fixture(scope="session")
def constants():
    return expansion_constants(DEFAULT_CONFIG)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    rows = getattr(mod, "RESULTS", [])
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
