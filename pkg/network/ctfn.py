"""
核心张量融合网络(CTFN)
主要功能：由 LR-HSI 与 HR-MSI 计算核张量特征 F_C

实现说明：
1. 编码：两路各两层 3x3 卷积
2. 下采样：s 个阶段，HSI 路经 SSAB，MSI 路经 SDAB，二者共享该阶段的光谱注意力
3. 瓶颈：[F_Y,s; F_X,s] 经 3x3 卷积融合
4. 上采样：阶段 i = s..1 依次经 SSAM、SFB、SUAB，空间尺寸回到 (W, H)
5. 变换层输出 F_C，形状 (1, n3, n1, n2)
6. use_ctfn 关闭时退化为编码 + 最近邻上采样 + 3x3 卷积融合 + 变换层
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union
import logging

from autodiff import ops
from autodiff.engine import DiffArray
from autodiff.layers import conv2d, relu
from network.blocks import (
    cube_to_array,
    encode,
    fuse_bottleneck,
    sdab_forward,
    sfb_suab_forward,
    spectral_attention,
    ssab_forward,
    ssam,
    transform,
)
from network.params import CtfnParams
from tensor.core import HyperCube

logger = logging.getLogger(__name__)


@dataclass
class FeaturePyramid:
    """
    前向过程中的中间特征

    属性说明：
    - fx: HSI 路各阶段特征，fx[0] 为编码输出
    - fy: MSI 路各阶段特征，fy[i] 空间尺寸为 (W/2^i, H/2^i)
    - bottleneck: 瓶颈融合特征 F_B
    - f_up: 上采样各阶段输出，按阶段 s..1 的顺序
    - attention: 各阶段注意力图 F_A,i，按阶段 s..1 的顺序(关闭时为 None)
    """
    fx: List[DiffArray] = field(default_factory=list)
    fy: List[DiffArray] = field(default_factory=list)
    bottleneck: Optional[DiffArray] = None
    f_up: List[DiffArray] = field(default_factory=list)
    attention: List[Optional[DiffArray]] = field(default_factory=list)


def _as_array(x: Union[HyperCube, DiffArray], params: CtfnParams) -> DiffArray:
    return cube_to_array(x, params.config.np_dtype) if isinstance(x, HyperCube) else x


def core_from_inputs(x: Union[HyperCube, DiffArray], y: Union[HyperCube, DiffArray],
                     params: CtfnParams) -> Tuple[DiffArray, FeaturePyramid]:
    """
    CTFN 完整前向

    参数:
        x: LR-HSI (w, h, S)
        y: HR-MSI (W, H, s)
        params: 网络参数

    返回:
        (F_C, 中间特征)，F_C 形状 (1, n3, n1, n2)
    """
    config = params.config
    x, y = _as_array(x, params), _as_array(y, params)
    pyramid = FeaturePyramid()
    fx = encode(x, "hsi", params)
    fy = encode(y, "msi", params)
    pyramid.fx.append(fx)
    pyramid.fy.append(fy)

    if not config.use_ctfn:
        up = ops.upsample_nearest(fx, config.ratio)
        f = relu(conv2d(ops.concat([fy, up], axis=1), params.layer("plain_fusion")))
        pyramid.f_up.append(f)
        return transform(f, params), pyramid

    for stage in range(1, config.stages + 1):
        spe = spectral_attention(fx, params)
        fx = ssab_forward(fx, params, stage, spe)
        fy = sdab_forward(fy, params, stage, spe)
        pyramid.fx.append(fx)
        pyramid.fy.append(fy)

    f = fuse_bottleneck(pyramid.fx[-1], pyramid.fy[-1], params)
    pyramid.bottleneck = f
    for stage in range(config.stages, 0, -1):
        f_a = ssam(pyramid.fx[stage], pyramid.fy[stage], params, stage)
        f = sfb_suab_forward(f, pyramid.fy[stage], f_a, params, stage)
        pyramid.attention.append(f_a)
        pyramid.f_up.append(f)

    core = transform(f, params)
    logger.debug(f"CTFN前向完成: 核特征 {core.shape}")
    return core, pyramid
