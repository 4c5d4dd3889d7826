"""
参数初始化工具
主要功能：空间因子与重采样矩阵的线性插值初始化
"""

import numpy as np

from tensor.exceptions import ArgumentError


def interpolation_matrix(n_out: int, n_in: int, dtype=np.float64) -> np.ndarray:
    """
    一维线性插值矩阵(像素中心对齐)

    参数:
        n_out: 输出长度
        n_in: 输入长度

    返回:
        n_out x n_in 矩阵，每行非负且和为1；n_out == n_in 时为单位阵
    """
    if n_out < 1 or n_in < 1:
        raise ArgumentError(f"插值长度必须为正: {n_out}, {n_in}")
    m = np.zeros((n_out, n_in), dtype=np.float64)
    positions = (np.arange(n_out) + 0.5) * n_in / n_out - 0.5
    positions = np.clip(positions, 0.0, n_in - 1)
    low = np.floor(positions).astype(int)
    high = np.minimum(low + 1, n_in - 1)
    frac = positions - low
    rows = np.arange(n_out)
    np.add.at(m, (rows, low), 1.0 - frac)
    np.add.at(m, (rows, high), frac)
    return m.astype(dtype)
