import numpy as np
import pytest

from qwq import experiments, model

# Table I: fidelity of the Gaussian model against exact simulation
TABLE_I = {
    (1, 50): 0.3284, (1, 100): 0.1709,
    (2, 50): 0.9098, (2, 100): 0.7973,
    (3, 50): 0.9802, (3, 100): 0.9641,
    (5, 50): 0.9947, (5, 100): 0.9939,
    (10, 50): 0.9987, (10, 100): 0.9987,
}


@pytest.fixture(scope="session")
def exact_trajectory_s5():
    """Exact two-walker states for sigma0 = 5 at t = 0..10."""
    ts = list(range(11))
    return dict(zip(ts, experiments._spin_trajectory(5.0, ts)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(rng, dim=4, rank=None):
    rank = rank or dim
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def werner(eps, sigma0, t):
    return model.werner_spin_state(eps, model.spin_density_closed(sigma0, t))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
