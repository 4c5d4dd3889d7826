"""
退化算子数据模型
定义仿真所用的空间退化(PSF)、光谱响应(SRF)与噪声配置

包含：
1. 空间退化算子 SpatialDegradation (P1, P2)
2. 光谱响应算子 SpectralResponse (P3)
3. 噪声配置 NoiseSpec
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from tensor.exceptions import ArgumentError

ROW_SUM_TOLERANCE = 1e-10


def _check_stochastic_rows(m: np.ndarray, name: str) -> np.ndarray:
    m = np.array(m, dtype=np.float64, copy=True)
    if m.ndim != 2:
        raise ArgumentError(f"{name} 必须是二维矩阵，实际形状: {m.shape}")
    if np.any(m < 0):
        raise ArgumentError(f"{name} 存在负元素")
    if not np.allclose(m.sum(axis=1), 1.0, rtol=0.0, atol=ROW_SUM_TOLERANCE):
        raise ArgumentError(f"{name} 每行之和必须为1")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class SpatialDegradation:
    """
    空间退化算子(模糊+下采样)

    属性说明：
    - p1: 宽度方向矩阵 (w x W)
    - p2: 高度方向矩阵 (h x H)
    - ratio: 空间下采样倍率
    - blur_sigma: 高斯模糊标准差(像素)
    """
    p1: np.ndarray
    p2: np.ndarray
    ratio: int
    blur_sigma: float = 0.0

    def __post_init__(self):
        if self.ratio < 1:
            raise ArgumentError(f"下采样倍率必须为正整数，实际为: {self.ratio}")
        p1 = _check_stochastic_rows(self.p1, "P1")
        p2 = _check_stochastic_rows(self.p2, "P2")
        for name, p in (("P1", p1), ("P2", p2)):
            if p.shape[1] != self.ratio * p.shape[0]:
                raise ArgumentError(f"{name} 形状 {p.shape} 与倍率 {self.ratio} 不一致")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @property
    def low_dims(self) -> Tuple[int, int]:
        return self.p1.shape[0], self.p2.shape[0]

    @property
    def high_dims(self) -> Tuple[int, int]:
        return self.p1.shape[1], self.p2.shape[1]


@dataclass(frozen=True)
class SpectralResponse:
    """
    光谱响应算子

    属性说明：
    - p3: 光谱响应矩阵 (s x S)，每行非负且和为1
    - band_ranges: 每个输出波段对应的输入波段区间(闭区间)，由文件加载时为空
    """
    p3: np.ndarray
    band_ranges: List[Tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        p3 = _check_stochastic_rows(self.p3, "P3")
        if p3.shape[0] >= p3.shape[1]:
            raise ArgumentError(f"多光谱波段数 {p3.shape[0]} 必须小于高光谱波段数 {p3.shape[1]}")
        object.__setattr__(self, "p3", p3)
        object.__setattr__(self, "band_ranges", [tuple(r) for r in self.band_ranges])

    @property
    def msi_bands(self) -> int:
        return self.p3.shape[0]

    @property
    def hsi_bands(self) -> int:
        return self.p3.shape[1]


class NoiseSpec(BaseModel):
    """
    加性噪声配置

    属性说明：
    - enabled: 是否添加噪声
    - std: 高斯噪声标准差(反射率单位)
    - seed: 随机种子
    """
    enabled: bool = Field(False, description="是否添加噪声")
    std: float = Field(0.0, ge=0, description="噪声标准差")
    seed: int = Field(0, description="随机种子")
