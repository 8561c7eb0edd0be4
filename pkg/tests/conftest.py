import numpy as np
import pytest

from hogtrack.hog import GrayImage, HogConfig


@pytest.fixture
def small_config():
    """16x32 window with 4-px cells: 3 * 7 * 4 * 9 = 756 values."""
    return HogConfig(window_w=16, window_h=32, cell=4, block=2,
                     block_stride=4, bins=9)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_gray(rng, w, h):
    return GrayImage(rng.integers(0, 256, size=(h, w), dtype=np.uint8))
