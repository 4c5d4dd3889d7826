"""
对比基线
主要功能：LR-HSI 最近邻上采样
"""

import numpy as np

from tensor.core import HyperCube
from tensor.exceptions import ArgumentError


def nearest_upsample(x: HyperCube, ratio: int) -> HyperCube:
    """每个低分辨率像素复制为 ratio x ratio 块"""
    if ratio < 1:
        raise ArgumentError(f"ratio 必须为正，实际为: {ratio}")
    return HyperCube(np.repeat(np.repeat(x.data, ratio, axis=0), ratio, axis=1))
