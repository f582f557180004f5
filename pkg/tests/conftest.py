import numpy as np
import pytest

from sparseh2.data import TraitParams
from sparseh2.simulate import SimConfig, simulate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_data():
    """Sparse instance small enough for quick end-to-end runs."""
    cfg = SimConfig(n=120, N=400, params=TraitParams(q=0.02), target_eta=0.6, seed=7)
    return simulate(cfg)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
