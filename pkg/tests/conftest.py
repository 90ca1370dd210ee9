import pytest

from padim.geometry import build_layout, coupling_stats, sample_grid
from padim.link import SystemConfig
from padim.power import PaSpec


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def layout():
    return build_layout(500.0, 35.0)


@pytest.fixture(scope="session")
def grid(layout):
    return sample_grid(layout, 15000, 1)


@pytest.fixture(scope="session")
def coupling(layout, grid):
    return coupling_stats(layout, grid, 20.0)


@pytest.fixture(scope="session")
def etpa_var(cfg):
    return PaSpec.from_config(cfg, "etpa")


@pytest.fixture(scope="session")
def tpa_var(cfg):
    return PaSpec.from_config(cfg, "tpa")
