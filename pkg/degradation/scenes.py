"""
合成场景模块
主要功能：生成由若干端元线性混合而成的平滑高光谱参考图像

实现说明：
1. 端元光谱为波段轴上若干高斯峰之和，缩放到 [0.1, 0.9]
2. 丰度由各端元的二维高斯场经 softmax 归一化得到，每个像素丰度和为1
3. 给定种子时结果完全确定
"""

import logging

import numpy as np

from tensor.core import HyperCube
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)


def make_toy_scene(width: int = 32, height: int = 32, bands: int = 16,
                   endmembers: int = 4, seed: int = 0) -> HyperCube:
    """
    生成平滑的多端元混合场景

    参数:
        width / height / bands: 场景维度
        endmembers: 端元数
        seed: 随机种子

    返回:
        HyperCube (width, height, bands)，取值在 [0.1, 0.9]
    """
    if min(width, height, bands, endmembers) < 1:
        raise ArgumentError(f"场景维度与端元数必须为正: {(width, height, bands, endmembers)}")
    rng = np.random.default_rng(seed)

    band_axis = np.linspace(0.0, 1.0, bands)
    spectra = np.zeros((endmembers, bands))
    for e in range(endmembers):
        for _ in range(2):
            center = rng.uniform(0.0, 1.0)
            spread = rng.uniform(0.15, 0.4)
            spectra[e] += rng.uniform(0.5, 1.0) * np.exp(-((band_axis - center) ** 2) / (2 * spread ** 2))
    low, high = spectra.min(), spectra.max()
    spectra = 0.1 + 0.8 * (spectra - low) / (high - low if high > low else 1.0)

    u = np.linspace(0.0, 1.0, width)[:, None]
    v = np.linspace(0.0, 1.0, height)[None, :]
    logits = np.zeros((endmembers, width, height))
    for e in range(endmembers):
        cu, cv = rng.uniform(0.0, 1.0, size=2)
        spread = rng.uniform(0.2, 0.45)
        logits[e] = 4.0 * np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / (2 * spread ** 2))
    logits -= logits.max(axis=0, keepdims=True)
    abundances = np.exp(logits)
    abundances /= abundances.sum(axis=0, keepdims=True)

    cube = np.tensordot(abundances, spectra, axes=(0, 0))
    logger.info(f"合成场景生成完成: {cube.shape}, 端元数 {endmembers}, 种子 {seed}")
    return HyperCube(cube)
