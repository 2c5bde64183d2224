import numpy as np
import pytest

from formfind.tasks import ShellTask, TowerTask


@pytest.fixture(scope="session")
def shell_task():
    return ShellTask(grid_side=6)


@pytest.fixture(scope="session")
def tower_task():
    return TowerTask(num_rings=5, points_per_ring=8)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
