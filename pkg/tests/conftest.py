import pytest

from d2dcache import NeighborCacheDistribution, default_config


@pytest.fixture
def cfg():
    return default_config()


@pytest.fixture
def uniform_dist(cfg):
    return NeighborCacheDistribution.uniform(cfg.F, cfg.L)
