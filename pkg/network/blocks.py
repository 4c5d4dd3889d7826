"""
CTFN 基本模块
主要功能：特征编码、SSAB/SDAB 下采样阶梯、瓶颈融合、SSAM 注意力与 SFB/SUAB 上采样阶梯

实现说明：
1. 网络内部数组布局为 (1, C, W, H)，与 HyperCube 的 (W, H, C) 互相转置
2. 光谱注意力的两层全连接在所有阶段共享
3. 注意力子图关闭时以常数1代替，SSAM 整体关闭时跳过注意力乘积
"""

from typing import Optional, Union
import logging

import numpy as np

from autodiff import ops
from autodiff.engine import DiffArray, constant
from autodiff.layers import conv2d, deconv2d, global_pool, linear, normalize, relu, sigmoid, spatial_pool
from network.params import CtfnParams
from tensor.core import HyperCube
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

BRANCHES = ("hsi", "msi")


def cube_to_array(cube: HyperCube, dtype=np.float32) -> DiffArray:
    """HyperCube (W, H, C) -> 常量节点 (1, C, W, H)"""
    return constant(np.ascontiguousarray(cube.data.transpose(2, 0, 1)[None]), dtype=dtype)


def array_to_cube(x: DiffArray) -> HyperCube:
    """节点 (1, C, W, H) -> HyperCube (W, H, C)"""
    return HyperCube(x.value[0].transpose(1, 2, 0))


def encode(x: Union[HyperCube, DiffArray], branch: str, params: CtfnParams) -> DiffArray:
    """
    特征编码：两层 3x3 卷积 + ReLU

    参数:
        x: LR-HSI 或 HR-MSI
        branch: "hsi" 或 "msi"
        params: 网络参数

    返回:
        (1, n_s, ·, ·) 特征，空间尺寸不变
    """
    if branch not in BRANCHES:
        raise ArgumentError(f"分支必须为 hsi 或 msi，实际为: {branch}")
    if isinstance(x, HyperCube):
        x = cube_to_array(x, params.config.np_dtype)
    expected = params.config.hsi_dims if branch == "hsi" else params.config.msi_dims
    if (x.shape[2], x.shape[3], x.shape[1]) != tuple(expected):
        raise ArgumentError(f"{branch} 输入维度 {(x.shape[2], x.shape[3], x.shape[1])} 与配置 {expected} 不一致")
    f = relu(conv2d(x, params.layer(f"enc_{branch}.0")))
    return relu(conv2d(f, params.layer(f"enc_{branch}.1")))


def spectral_attention(f: DiffArray, params: CtfnParams) -> Optional[DiffArray]:
    """
    光谱注意力向量 sigmoid(mlp(AP(f)) + mlp(MP(f)))

    返回:
        (1, n_s, 1, 1)；光谱注意力关闭时返回 None
    """
    if not params.config.spectral_attention_on:
        return None
    fc1, fc2 = params.layer("attention.fc1"), params.layer("attention.fc2")

    def mlp(v: DiffArray) -> DiffArray:
        return linear(relu(linear(v, fc1)), fc2)

    logits = ops.add(mlp(global_pool(f, "avg")), mlp(global_pool(f, "max")))
    return ops.reshape(sigmoid(logits), (1, f.shape[1], 1, 1))


def ssab_forward(f: DiffArray, params: CtfnParams, stage: int,
                 spe_attention: Optional[DiffArray] = None) -> DiffArray:
    """光谱压缩注意力块：relu(conv1x1(f)) ⊙ spe"""
    out = relu(conv2d(f, params.layer(f"ssab.{stage}")))
    if spe_attention is not None:
        out = ops.mul(out, spe_attention)
    return out


def sdab_forward(f: DiffArray, params: CtfnParams, stage: int,
                 spe_attention: Optional[DiffArray] = None) -> DiffArray:
    """
    空间下采样块：残差块(两层3x3卷积+恒等跳连)后接 2x2 步长2卷积

    参数:
        f: MSI 分支第 stage-1 阶段特征 (1, n_s, W', H')
        stage: 阶段编号(从1开始)
        spe_attention: 与 SSAB 共享的光谱注意力向量

    返回:
        (1, n_s, W'/2, H'/2)
    """
    if f.shape[2] % 2 or f.shape[3] % 2:
        raise ArgumentError(f"SDAB 输入空间尺寸 {f.shape[2:]} 必须为偶数")
    inner = conv2d(relu(conv2d(f, params.layer(f"sdab.{stage}.res_a"))), params.layer(f"sdab.{stage}.res_b"))
    out = relu(conv2d(ops.add(f, inner), params.layer(f"sdab.{stage}.down")))
    if spe_attention is not None:
        out = ops.mul(out, spe_attention)
    return out


def fuse_bottleneck(fx_s: DiffArray, fy_s: DiffArray, params: CtfnParams) -> DiffArray:
    """瓶颈融合：conv3x3([F_Y,s; F_X,s])"""
    if fx_s.shape[2:] != fy_s.shape[2:]:
        raise ArgumentError(f"瓶颈融合空间尺寸不一致: HSI {fx_s.shape[2:]}, MSI {fy_s.shape[2:]}")
    return conv2d(ops.concat([fy_s, fx_s], axis=1), params.layer("bottleneck"))


def ssam(fx_i: DiffArray, fy_i: DiffArray, params: CtfnParams, stage: int) -> Optional[DiffArray]:
    """
    空谱注意力模块

    参数:
        fx_i: HSI 分支第 stage 阶段特征
        fy_i: MSI 分支第 stage 阶段特征 (1, n_s, W/2^i, H/2^i)
        stage: 阶段编号

    返回:
        F_A,i = sigmoid(spa ⊙ spe)，形状与 fy_i 相同；SSAM 关闭时返回 None
    """
    config = params.config
    if not config.use_ssam:
        return None
    if fx_i.shape[1] != fy_i.shape[1]:
        raise ArgumentError(f"阶段 {stage} 的通道数不一致: {fx_i.shape[1]} 与 {fy_i.shape[1]}")
    n_s = fy_i.shape[1]
    spe = spectral_attention(fx_i, params)
    if spe is None:
        spe = constant(np.ones((1, n_s, 1, 1)), dtype=fy_i.dtype)

    if config.spatial_attention_on:
        pooled = ops.concat([spatial_pool(fy_i, "avg"), spatial_pool(fy_i, "max")], axis=1)
        spa = conv2d(pooled, params.layer(f"ssam.{stage}.conv"))
        spa = sigmoid(normalize(spa, params.layer(f"ssam.{stage}.norm")))
    else:
        spa = constant(np.ones((1, 1) + fy_i.shape[2:]), dtype=fy_i.dtype)
    return sigmoid(ops.mul(spa, spe))


def sfb_suab_forward(f_up: DiffArray, fy_i: DiffArray, f_a: Optional[DiffArray],
                     params: CtfnParams, stage: int) -> DiffArray:
    """
    跳连融合块 + 反卷积上采样块

    f = F_A,i ⊙ relu(conv2([relu(conv1(f_up)); relu(SFB(F_Y,i))]))，
    随后 relu(deconv(f)) 使空间尺寸加倍
    """
    if f_up.shape[2:] != fy_i.shape[2:]:
        raise ArgumentError(f"SFB 空间尺寸不一致: {f_up.shape[2:]} 与 {fy_i.shape[2:]}")
    up = relu(conv2d(f_up, params.layer(f"suab.{stage}.conv1")))
    skip = relu(conv2d(fy_i, params.layer(f"sfb.{stage}")))
    fused = relu(conv2d(ops.concat([up, skip], axis=1), params.layer(f"suab.{stage}.conv2")))
    if f_a is not None:
        fused = ops.mul(f_a, fused)
    return relu(deconv2d(fused, params.layer(f"suab.{stage}.up")))


def transform(f: DiffArray, params: CtfnParams) -> DiffArray:
    """变换层：1x1 卷积 n_s -> n3，再沿宽、高两轴重采样到 (n1, n2)"""
    t = conv2d(f, params.layer("transform"))
    t = ops.mode_product(t, params.resample_w, 2)
    return ops.mode_product(t, params.resample_h, 3)
