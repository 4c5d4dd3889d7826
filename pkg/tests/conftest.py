"""
测试公共夹具
提供带种子的随机数生成器、合成场景与小规模 float64 网络配置
"""

import os

import numpy as np
import pytest

from degradation.scenes import make_toy_scene
from degradation.simulation import make_spatial_degradation, simulate_pair, srf_from_ranges, uniform_band_ranges
from network.config import CtfnConfig
from tensor.core import HyperCube

RUN_SLOW = os.environ.get("HSIFUSE_RUN_SLOW") == "1"


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    skip = pytest.mark.skip(reason="设置 HSIFUSE_RUN_SLOW=1 以运行端到端训练测试")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_scene() -> HyperCube:
    return make_toy_scene()


@pytest.fixture
def small_config() -> CtfnConfig:
    """LR-HSI 2x2x6，HR-MSI 8x8x3，两个阶段"""
    return CtfnConfig(hsi_dims=(2, 2, 6), msi_dims=(8, 8, 3), n_s=6, reduction=2,
                      core_dims=(6, 6, 5), dtype="float64")


@pytest.fixture
def small_pair():
    """由 8x8x6 随机参考图像仿真得到的 (LR-HSI, HR-MSI, PSF, SRF)"""
    reference = HyperCube(np.random.default_rng(99).uniform(0.1, 0.9, size=(8, 8, 6)))
    d = make_spatial_degradation(8, 8, 4)
    r = srf_from_ranges(uniform_band_ranges(6, 3), 6)
    x, y = simulate_pair(reference, d, r)
    return x, y, d, r
