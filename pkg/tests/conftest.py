import numpy as np
import pytest

from subnyq.scene import RadarConfig


@pytest.fixture
def small_cfg():
    # N = 16 bins, P = 4 pulses
    return RadarConfig(1e-6, 4, 16e6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
