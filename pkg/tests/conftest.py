import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from curblabel.bev import GridConfig  # noqa: E402


@pytest.fixture
def grid():
    return GridConfig()


@pytest.fixture
def small_grid():
    # 6.4 m x 6.4 m at 0.1 m/px
    return GridConfig(resolution=0.1, x_range=(-3.2, 3.2), y_range=(-3.2, 3.2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
