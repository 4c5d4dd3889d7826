"""
损失函数模块
主要功能：重构损失、PSF-SRF 损失与联合损失

实现说明：
1. 所有范数项按元素取均值(l1 为平均绝对误差，l2 为均方误差)，权重与分辨率无关
2. PSF-SRF 损失 = ||X - PSF(Z)|| + ||Y - SRF(Z)|| + γ·||SRF(X) - PSF(Y)||
3. 联合损失 = L_rec + α·L_PSF-SRF + L_spe + L_spa，流形项已含 β1、β2
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union
import logging

import numpy as np

from autodiff import ops
from autodiff.engine import DiffArray, as_diff
from network.degradation_layers import DegradationLayers
from tensor.core import HyperCube
from tensor.exceptions import ArgumentError
from training.config import AblationSwitches, LossWeights

logger = logging.getLogger(__name__)

Operand = Union[DiffArray, HyperCube, np.ndarray]


def _node(value: Operand) -> DiffArray:
    if isinstance(value, HyperCube):
        return as_diff(value.data)
    return as_diff(value)


def norm_loss(a: Operand, b: Operand, loss_norm: str = "l1") -> DiffArray:
    """
    逐元素平均误差

    参数:
        a, b: 形状相同的数组
        loss_norm: "l1" 或 "l2"
    """
    a, b = _node(a), _node(b)
    if a.shape != b.shape:
        raise ArgumentError(f"损失输入形状不一致: {a.shape} 与 {b.shape}")
    diff = ops.sub(a, b)
    if loss_norm == "l1":
        return ops.mean(ops.absolute(diff))
    if loss_norm == "l2":
        return ops.mean(ops.square(diff))
    raise ArgumentError(f"loss_norm 必须为 l1 或 l2，实际为: {loss_norm}")


def rec_loss(x: Operand, x_hat: Operand, y: Operand, y_hat: Operand,
             loss_norm: str = "l1") -> DiffArray:
    """重构损失 ||X - X̂|| + ||Y - Ŷ||"""
    return ops.add(norm_loss(x, x_hat, loss_norm), norm_loss(y, y_hat, loss_norm))


def psf_srf_terms(x: DiffArray, y: DiffArray, z_hat: DiffArray, degradation: DegradationLayers,
                  loss_norm: str = "l1") -> Tuple[DiffArray, DiffArray]:
    """
    PSF-SRF 损失的两个组成部分

    参数:
        x: LR-HSI (1, S, w, h)
        y: HR-MSI (1, s, W, H)
        z_hat: 融合结果 (1, S, W, H)
        degradation: PSF/SRF 层

    返回:
        (L_degraded, L_LR-MSI)
    """
    degraded = ops.add(norm_loss(x, degradation.psf_forward(z_hat), loss_norm),
                       norm_loss(y, degradation.srf_forward(z_hat), loss_norm))
    lr_msi = norm_loss(degradation.srf_forward(x), degradation.psf_forward(y), loss_norm)
    return degraded, lr_msi


def psf_srf_loss(x: DiffArray, y: DiffArray, z_hat: DiffArray, degradation: DegradationLayers,
                 gamma: float = 1.0, loss_norm: str = "l1") -> DiffArray:
    """PSF-SRF 损失 L_degraded + γ·L_LR-MSI"""
    degraded, lr_msi = psf_srf_terms(x, y, z_hat, degradation, loss_norm)
    return ops.add(degraded, ops.scale(lr_msi, gamma))


@dataclass
class LossTerms:
    """
    单轮损失各项(关闭的项为 None)

    属性说明：
    - rec: 重构损失
    - degraded / lr_msi: PSF-SRF 损失的两部分(未加权)
    - spectral / spatial: 光谱/空间流形项(已含 β1、β2)
    """
    rec: Optional[DiffArray] = None
    degraded: Optional[DiffArray] = None
    lr_msi: Optional[DiffArray] = None
    spectral: Optional[DiffArray] = None
    spatial: Optional[DiffArray] = None

    def values(self) -> Tuple[float, float, float, float, float]:
        return tuple(0.0 if t is None else t.item()
                     for t in (self.rec, self.degraded, self.lr_msi, self.spectral, self.spatial))


def joint_loss(terms: LossTerms, weights: LossWeights,
               ablation: Optional[AblationSwitches] = None) -> DiffArray:
    """
    联合损失 L = L_rec + α·(L_degraded + γ·L_LR-MSI) + L_spe + L_spa

    参数:
        terms: 各项损失
        weights: 损失权重
        ablation: 消融开关，关闭的项不计入

    返回:
        标量节点
    """
    ablation = ablation or AblationSwitches()
    parts = []
    if ablation.use_rec_loss and terms.rec is not None:
        parts.append(terms.rec)
    if ablation.use_psf_srf_loss and terms.degraded is not None:
        psf = terms.degraded
        if terms.lr_msi is not None:
            psf = ops.add(psf, ops.scale(terms.lr_msi, weights.gamma))
        parts.append(ops.scale(psf, weights.alpha))
    if ablation.use_spectral_manifold and terms.spectral is not None:
        parts.append(terms.spectral)
    if ablation.use_spatial_manifold and terms.spatial is not None:
        parts.append(terms.spatial)
    if not parts:
        raise ArgumentError("所有损失项均被关闭")
    total = parts[0]
    for part in parts[1:]:
        total = ops.add(total, part)
    return total
