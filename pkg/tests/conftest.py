import numpy as np
import pytest

from aniso.geometry import PointPattern, RectWindow


def random_pattern(n, seed=0, window=None, dim=2):
    window = window or RectWindow.square(-1.0, 1.0, dim)
    rng = np.random.default_rng(seed)
    x = window.lo + rng.random((n, window.dim)) * window.sides
    return PointPattern(x, window)


@pytest.fixture
def small2d():
    return random_pattern(40, seed=11, window=RectWindow([0.0, 0.0], [1.0, 0.8]))


@pytest.fixture
def small3d():
    return random_pattern(30, seed=12, window=RectWindow([0, 0, 0], [1.0, 0.9, 0.8]))


# criterion lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
