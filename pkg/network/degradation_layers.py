"""
可学习退化层模块
主要功能：盲融合中的 PSF / SRF 层

实现说明：
1. PSF：每个空间轴一个长度为 scale、步长为 scale 的一维卷积核，
   所有波段共享，等价于矩阵 I_w ⊗ k^T 沿空间轴的模积
2. SRF：S->s 的 1x1 卷积，每次前向先截断为非负再逐行归一化
3. 非盲模式下直接使用给定的 P1、P2、P3 常量矩阵
"""

from typing import Dict, Optional, Tuple
import logging

import numpy as np

from autodiff import ops
from autodiff.engine import DiffArray, constant
from autodiff.layers import LayerKind, LayerParams
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

SRF_FLOOR = 1e-8


class DegradationLayers:
    """
    PSF/SRF 退化层

    属性说明：
    - low_dims: LR 空间维度 (w, h)
    - scale: 空间倍率
    - psf_w / psf_h: 宽/高方向 PSF 核层(可学习模式)
    - srf: 光谱响应层(可学习模式)
    - frozen: 冻结后不参与优化
    """

    def __init__(self, low_dims: Tuple[int, int], scale: int, hsi_bands: int, msi_bands: int,
                 dtype=np.float32):
        self.low_dims = tuple(low_dims)
        self.scale = int(scale)
        self.hsi_bands = hsi_bands
        self.msi_bands = msi_bands
        self.dtype = np.dtype(dtype)
        self.frozen = False
        self._fixed: Optional[Tuple[DiffArray, DiffArray, DiffArray]] = None

        self.psf_w = LayerParams.create(LayerKind.CONV_SCALE_X1, 1, 1, bias=False, scale=scale,
                                        dtype=dtype, name="psf_w")
        self.psf_h = LayerParams.create(LayerKind.CONV_SCALE_X1, 1, 1, bias=False, scale=scale,
                                        dtype=dtype, name="psf_h")
        self.srf = LayerParams.create(LayerKind.CONV1X1, hsi_bands, msi_bands, bias=False,
                                      dtype=dtype, name="srf")
        # 初始为块平均 PSF 与均匀 SRF
        self.psf_w.weight.value[...] = 1.0 / scale
        self.psf_h.weight.value[...] = 1.0 / scale
        self.srf.weight.value[...] = 1.0 / hsi_bands

    @classmethod
    def from_matrices(cls, p1: np.ndarray, p2: np.ndarray, p3: np.ndarray,
                      dtype=np.float32) -> "DegradationLayers":
        """
        由固定算子矩阵构造(非盲模式)

        参数:
            p1: (w x W) 宽度方向矩阵
            p2: (h x H) 高度方向矩阵
            p3: (s x S) 光谱响应矩阵
        """
        p1, p2, p3 = (np.asarray(m, dtype=np.float64) for m in (p1, p2, p3))
        if p1.shape[1] % p1.shape[0] or p2.shape[1] % p2.shape[0]:
            raise ArgumentError(f"PSF 矩阵形状不合法: {p1.shape}, {p2.shape}")
        layers = cls((p1.shape[0], p2.shape[0]), p1.shape[1] // p1.shape[0],
                     p3.shape[1], p3.shape[0], dtype=dtype)
        layers._fixed = tuple(constant(m, dtype=dtype) for m in (p1, p2, p3))
        layers.frozen = True
        logger.info(f"退化层使用固定算子: P1 {p1.shape}, P2 {p2.shape}, P3 {p3.shape}")
        return layers

    @property
    def is_fixed(self) -> bool:
        return self._fixed is not None

    def freeze(self):
        self.frozen = True

    def psf_matrices(self) -> Tuple[DiffArray, DiffArray]:
        """返回 (P1, P2)，可学习模式下对核可微"""
        if self._fixed is not None:
            return self._fixed[0], self._fixed[1]
        w, h = self.low_dims
        kernel_w = ops.reshape(self.psf_w.weight, (self.scale,))
        kernel_h = ops.reshape(self.psf_h.weight, (self.scale,))
        return ops.block_kernel_matrix(kernel_w, w), ops.block_kernel_matrix(kernel_h, h)

    def srf_matrix(self) -> DiffArray:
        """返回 P3，行非负且和为1"""
        if self._fixed is not None:
            return self._fixed[2]
        weight = ops.reshape(self.srf.weight, (self.msi_bands, self.hsi_bands))
        return ops.row_normalize(ops.clip_min(weight, SRF_FLOOR))

    def psf_forward(self, z: DiffArray) -> DiffArray:
        """空间退化：沿宽、高两个轴作用 P1、P2，输入 (1, C, W, H)"""
        p1, p2 = self.psf_matrices()
        if z.shape[2] != p1.shape[1] or z.shape[3] != p2.shape[1]:
            raise ArgumentError(f"输入空间维度 {z.shape[2:]} 与 PSF {(p1.shape[1], p2.shape[1])} 不一致")
        return ops.mode_product(ops.mode_product(z, p1, 2), p2, 3)

    def srf_forward(self, z: DiffArray) -> DiffArray:
        """光谱退化：沿通道轴作用 P3，输入 (1, S, ·, ·)"""
        p3 = self.srf_matrix()
        if z.shape[1] != p3.shape[1]:
            raise ArgumentError(f"输入波段数 {z.shape[1]} 与 SRF {p3.shape[1]} 不一致")
        return ops.mode_product(z, p3, 1)

    def named_parameters(self) -> Dict[str, DiffArray]:
        return {} if self.frozen else self.all_parameters()

    def all_parameters(self) -> Dict[str, DiffArray]:
        """包括冻结参数在内的全部可学习退化参数(用于检查点)"""
        if self._fixed is not None:
            return {}
        return {
            "psf_w.weight": self.psf_w.weight,
            "psf_h.weight": self.psf_h.weight,
            "srf.weight": self.srf.weight,
        }

    def operators(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """当前 P1、P2、P3 的数值"""
        p1, p2 = self.psf_matrices()
        return p1.value.copy(), p2.value.copy(), self.srf_matrix().value.copy()
