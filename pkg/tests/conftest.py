import math

import pytest

from landau_soft.grid import build_grid
from landau_soft.solver import LandauOperator, SolverConfig
from landau_soft.state import maxwellian, mixture

# criterion lines collected by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES = []

STEPS = 200
STRIDE = 5


def two_bump(gamma, steps=STEPS, stride=STRIDE):
    """Masses 0.5 at T = 0.5 centred at +-e1 on n = 32, L = 6."""
    g = build_grid(32, 6.0)
    st = mixture(g, [(0.5, 0.5, (1.0, 0.0, 0.0)), (0.5, 0.5, (-1.0, 0.0, 0.0))])
    op = LandauOperator(g, gamma)
    return op.simulate(st, SolverConfig(t_end=1e3, max_steps=steps, output_stride=stride))


def cold_two_bump(gamma, T=2e-4, steps=100, stride=STRIDE):
    """Concentrated data: bumps at +-2 sqrt(T) in a box of half-width 2 sqrt(T) + 7.5 sqrt(T)."""
    s = math.sqrt(T)
    g = build_grid(32, 9.5 * s)
    st = mixture(g, [(0.5, T, (2.0 * s, 0.0, 0.0)), (0.5, T, (-2.0 * s, 0.0, 0.0))])
    op = LandauOperator(g, gamma)
    return op.simulate(st, SolverConfig(t_end=1e3, max_steps=steps, output_stride=stride))


@pytest.fixture(scope="session")
def trajectories():
    """Lazily simulated two-bump trajectories keyed by gamma, shared by all test modules."""
    cache = {}

    def get(gamma):
        if gamma not in cache:
            cache[gamma] = two_bump(gamma)
        return cache[gamma]

    return get


@pytest.fixture(scope="session")
def cold_trajectories():
    cache = {}

    def get(gamma):
        if gamma not in cache:
            cache[gamma] = cold_two_bump(gamma)
        return cache[gamma]

    return get


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(16, 5.0)


@pytest.fixture(scope="session")
def unit_maxwellian():
    return maxwellian(build_grid(32, 6.0), 1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
