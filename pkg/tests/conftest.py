import numpy as np
import pytest

from dcone.folds import solve_single_fold
from dcone.grid import PeriodicGrid
from dcone.recovery import build_stages, triple_from_w
from dcone.solver import SolverConfig, minimize


@pytest.fixture(scope="session")
def grid1024():
    return PeriodicGrid(1024)


@pytest.fixture(scope="session")
def grid2048():
    return PeriodicGrid(2048)


@pytest.fixture(scope="session")
def fold1024(grid1024):
    return solve_single_fold(grid1024)


@pytest.fixture(scope="session")
def fold2048(grid2048):
    return solve_single_fold(grid2048)


@pytest.fixture(scope="session")
def fold4096():
    return solve_single_fold(PeriodicGrid(4096))


@pytest.fixture(scope="session")
def bump_report_1024():
    return minimize(SolverConfig(n=1024, seed=0), init="bump")


@pytest.fixture(scope="session")
def bump_report_2048():
    return minimize(SolverConfig(n=2048, seed=0), init="bump")


@pytest.fixture(scope="session")
def stage_result_01(fold2048):
    triple = triple_from_w(fold2048.candidate.w)
    return build_stages(triple, 0.1)


def rng(seed=0):
    return np.random.default_rng(seed)
