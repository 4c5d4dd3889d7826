"""
共享参数解码器
主要功能：由核张量特征重构 LR-HSI、HR-MSI 与 HR-HSI

实现说明：
1. 解码器是三个无偏置线性模积：Θ_W 作用于宽轴，Θ_H 作用于高轴，Θ_S 作用于通道轴
2. LR-HSI 路径使用 PSF(Θ_W)、PSF(Θ_H)；HR-MSI 路径使用 SRF(Θ_S)
3. 三条路径引用同一组因子对象，HR-HSI 解码即 Tucker 重构
"""

from enum import Enum
from typing import Tuple
import logging

from autodiff import ops
from autodiff.engine import DiffArray
from network.params import CtfnParams
from tensor.core import HyperCube, TuckerFactors
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)


class DecodeTarget(str, Enum):
    """解码目标枚举"""
    LR_HSI = "lr_hsi"  # 低分辨率高光谱
    HR_MSI = "hr_msi"  # 高分辨率多光谱
    HR_HSI = "hr_hsi"  # 高分辨率高光谱(融合结果)


def decoder_factors(which: DecodeTarget, params: CtfnParams) -> Tuple[DiffArray, DiffArray, DiffArray]:
    """返回指定解码路径的 (宽, 高, 光谱) 因子矩阵"""
    which = DecodeTarget(which)
    w_factor, h_factor, s_factor = params.w_factor, params.h_factor, params.s_matrix()
    if which == DecodeTarget.LR_HSI:
        p1, p2 = params.degradation.psf_matrices()
        return ops.matmul(p1, w_factor), ops.matmul(p2, h_factor), s_factor
    if which == DecodeTarget.HR_MSI:
        return w_factor, h_factor, ops.matmul(params.degradation.srf_matrix(), s_factor)
    return w_factor, h_factor, s_factor


def decode(core: DiffArray, which: DecodeTarget, params: CtfnParams) -> DiffArray:
    """
    解码

    参数:
        core: 核张量特征 (1, n3, n1, n2)
        which: 解码目标
        params: 网络参数

    返回:
        (1, bands, width, height) 节点
    """
    n1, n2, n3 = params.config.resolved_core_dims
    if core.shape != (1, n3, n1, n2):
        raise ArgumentError(f"核特征形状 {core.shape} 与配置 {(1, n3, n1, n2)} 不一致")
    w_factor, h_factor, s_factor = decoder_factors(which, params)
    out = ops.mode_product(core, w_factor, 2)
    out = ops.mode_product(out, h_factor, 3)
    return ops.mode_product(out, s_factor, 1)


def core_cube(core: DiffArray) -> HyperCube:
    """核特征 (1, n3, n1, n2) -> 核张量 (n1, n2, n3)"""
    return HyperCube(core.value[0].transpose(1, 2, 0))


def extract_factors(core: DiffArray, params: CtfnParams) -> TuckerFactors:
    """导出当前核张量与共享因子矩阵"""
    return TuckerFactors(
        core=core_cube(core),
        w_factor=params.w_factor.value,
        h_factor=params.h_factor.value,
        s_factor=params.s_matrix().value,
    )
