import numpy as np
import pytest

from app.aimc import AimcTile
from app.machine import SystemConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def high_cfg() -> SystemConfig:
    return SystemConfig.for_profile("high_power")


@pytest.fixture
def low_cfg() -> SystemConfig:
    return SystemConfig.for_profile("low_power")


@pytest.fixture
def small_tile() -> AimcTile:
    """8 x 8 tile with shift 0 and the identity matrix programmed."""
    tile = AimcTile(8, 8, out_shift=0)
    tile.xbar.program_tile(0, 0, np.eye(8, dtype=np.int8))
    return tile


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "results"
