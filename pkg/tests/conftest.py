import logging
import math

import numpy as np
import pytest
from hypothesis import settings

from scenecompress.scene import ScenePoint, make_scene

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# synthetic scenes routinely contain a few single-view points
logging.getLogger("scenecompress.distinctiveness").setLevel(logging.ERROR)


def direct_rbf(a, b, sigma):
    """Straight-line kernel evaluation, independent of the package."""
    sq = sum((float(p) - float(q)) ** 2 for p, q in zip(a, b))
    return math.exp(-sq / (2.0 * sigma * sigma))


def direct_gram(x, sigma):
    m = len(x)
    k = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            k[i, j] = direct_rbf(x[i], x[j], sigma)
    return k


def direct_cost(alpha, k, d, tau):
    return float(alpha @ k @ alpha - tau * (d @ alpha))


@pytest.fixture
def one_point_scene():
    return make_scene([ScenePoint(0, (0.0, 0.0, 0.0), (), 1)], total_cameras=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# filled by tests/test_acceptance.py, one line per criterion
ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
