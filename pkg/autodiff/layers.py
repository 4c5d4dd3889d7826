"""
神经网络层模块
主要功能：CTFN 所需的可微层及其参数初始化

实现说明：
1. 数组布局固定为 (1, channels, height, width)，batch 恒为1
2. 卷积使用 sliding_window_view 构造窗口后 tensordot 计算
3. 转置卷积仅支持步长等于核长(无重叠)的情形
4. 最大池化的反向梯度路由到扫描顺序中第一个最大元素
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from autodiff import ops
from autodiff.engine import DiffArray, parameter
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

NORM_EPS = 1e-5


class LayerKind(str, Enum):
    """层类型枚举"""
    CONV3X3 = "conv3x3"              # 3x3 同尺寸卷积
    CONV1X1 = "conv1x1"              # 1x1 卷积
    CONV2X2_S2 = "conv2x2_s2"        # 2x2 步长2 下采样卷积
    DECONV2X2_S2 = "deconv2x2_s2"    # 2x2 步长2 转置卷积
    CONV_SCALE_X1 = "conv_scale_x1"  # scale x 1 步长scale 卷积(PSF)
    FC = "fc"                        # 全连接
    NORM = "norm"                    # 特征标准化


_KERNEL = {
    LayerKind.CONV3X3: (3, 1, 1),
    LayerKind.CONV1X1: (1, 1, 0),
    LayerKind.CONV2X2_S2: (2, 2, 0),
    LayerKind.DECONV2X2_S2: (2, 2, 0),
}


@dataclass
class LayerParams:
    """
    层参数

    属性说明：
    - kind: 层类型
    - weight: 权重(norm 层为缩放系数)
    - bias: 偏置(norm 层为平移量)，可为空
    - in_channels / out_channels: 输入/输出通道数
    - stride / padding: 步长与填充
    """
    kind: LayerKind
    weight: DiffArray
    bias: Optional[DiffArray]
    in_channels: int
    out_channels: int
    stride: int = 1
    padding: int = 0

    @classmethod
    def create(cls, kind: LayerKind, in_channels: int, out_channels: int,
               bias: bool = True, scale: int = 2, dtype=np.float32,
               name: str = "layer") -> "LayerParams":
        """按层类型创建零初始化参数(随后通过 kaiming_init 初始化)"""
        kind = LayerKind(kind)
        if kind in _KERNEL:
            k, stride, padding = _KERNEL[kind]
            shape = (in_channels, out_channels, k, k) if kind == LayerKind.DECONV2X2_S2 \
                else (out_channels, in_channels, k, k)
        elif kind == LayerKind.CONV_SCALE_X1:
            shape, stride, padding = (out_channels, in_channels, scale, 1), scale, 0
        elif kind == LayerKind.FC:
            shape, stride, padding = (out_channels, in_channels), 1, 0
        else:
            if in_channels != out_channels:
                raise ArgumentError("norm 层输入输出通道数必须相同")
            shape, stride, padding = (out_channels,), 1, 0
        weight = parameter(np.zeros(shape, dtype=dtype), name=f"{name}.weight")
        bias_param = parameter(np.zeros(out_channels, dtype=dtype), name=f"{name}.bias") if bias else None
        return cls(kind=kind, weight=weight, bias=bias_param, in_channels=in_channels,
                   out_channels=out_channels, stride=stride, padding=padding)

    @property
    def fan_in(self) -> int:
        if self.kind == LayerKind.FC:
            return self.in_channels
        if self.kind == LayerKind.DECONV2X2_S2:
            # 步长等于核长，每个输出像素只接收一个核位置
            return self.in_channels
        if self.kind == LayerKind.NORM:
            return 1
        return self.in_channels * int(np.prod(self.weight.shape[2:]))

    def parameters(self):
        yield self.weight
        if self.bias is not None:
            yield self.bias


def kaiming_init(p: LayerParams, rng_seed: Union[int, np.random.Generator]) -> LayerParams:
    """
    Kaiming 初始化

    参数:
        p: 层参数
        rng_seed: 随机种子或生成器

    返回:
        新的层参数；卷积/全连接权重 ~ N(0, 2/fan_in)，偏置为0；norm 层 scale=1, shift=0
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    dtype = p.weight.dtype
    if p.kind == LayerKind.NORM:
        weight = np.ones(p.weight.shape, dtype=dtype)
    else:
        std = np.sqrt(2.0 / p.fan_in)
        weight = rng.normal(0.0, std, size=p.weight.shape).astype(dtype)
    new_weight = parameter(weight, name=p.weight.name)
    new_bias = None
    if p.bias is not None:
        new_bias = parameter(np.zeros(p.bias.shape, dtype=dtype), name=p.bias.name)
    return replace(p, weight=new_weight, bias=new_bias)


def _check_input(x: DiffArray, p: LayerParams):
    if x.ndim != 4 or x.shape[0] != 1:
        raise ArgumentError(f"输入必须为 (1, C, H, W)，实际形状: {x.shape}")
    if x.shape[1] != p.in_channels:
        raise ArgumentError(f"输入通道数 {x.shape[1]} 与层定义 {p.in_channels} 不一致")


def conv2d(x: DiffArray, p: LayerParams) -> DiffArray:
    """
    二维互相关(含偏置)

    参数:
        x: 输入 (1, Cin, H, W)
        p: conv3x3 / conv1x1 / conv2x2_s2 层参数

    返回:
        输出 (1, Cout, Ho, Wo)
    """
    _check_input(x, p)
    w = p.weight.value
    kh, kw = w.shape[2], w.shape[3]
    stride, pad = p.stride, p.padding
    xp = np.pad(x.value, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    if xp.shape[2] < kh or xp.shape[3] < kw:
        raise ArgumentError(f"输入空间尺寸 {x.shape[2:]} 小于卷积核 {(kh, kw)}")
    if stride > 1 and ((xp.shape[2] - kh) % stride or (xp.shape[3] - kw) % stride):
        raise ArgumentError(f"输入空间尺寸 {x.shape[2:]} 不能被步长 {stride} 整除")
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    out_h, out_w = windows.shape[2], windows.shape[3]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if p.bias is not None:
        out = out + p.bias.value[None, :, None, None]
    out = np.ascontiguousarray(out, dtype=x.dtype)

    def backward(g):
        grad_w = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_xp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(g, w[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                grad_xp[:, :, i:i + stride * out_h:stride, j:j + stride * out_w:stride] += contrib
        grad_x = grad_xp[:, :, pad:pad + x.shape[2], pad:pad + x.shape[3]]
        grads = [grad_x, grad_w]
        if p.bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, p.weight) if p.bias is None else (x, p.weight, p.bias)
    return DiffArray(out, parents=parents, op=f"conv2d[{p.kind.value}]", backward_fn=backward)


def deconv2d(x: DiffArray, p: LayerParams) -> DiffArray:
    """
    转置卷积(核长=步长，空间尺寸放大 stride 倍)

    参数:
        x: 输入 (1, Cin, H, W)
        p: deconv2x2_s2 层参数，权重形状 (Cin, Cout, k, k)
    """
    if p.kind != LayerKind.DECONV2X2_S2:
        raise ArgumentError(f"deconv2d 需要 deconv2x2_s2 层，实际为: {p.kind}")
    _check_input(x, p)
    w = p.weight.value
    k = w.shape[2]
    _, _, h, wd = x.shape
    cout = w.shape[1]
    t = np.tensordot(x.value, w, axes=([1], [0]))                       # (1, H, W, Cout, k, k)
    out = t.transpose(0, 3, 1, 4, 2, 5).reshape(1, cout, h * k, wd * k)
    if p.bias is not None:
        out = out + p.bias.value[None, :, None, None]
    out = np.ascontiguousarray(out, dtype=x.dtype)

    def backward(g):
        gt = g.reshape(1, cout, h, k, wd, k).transpose(0, 2, 4, 1, 3, 5)  # (1, H, W, Cout, k, k)
        grad_x = np.tensordot(gt, w, axes=([3, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        grad_w = np.tensordot(x.value, gt, axes=([0, 2, 3], [0, 1, 2]))
        grads = [grad_x, grad_w]
        if p.bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, p.weight) if p.bias is None else (x, p.weight, p.bias)
    return DiffArray(out, parents=parents, op="deconv2d", backward_fn=backward)


def linear(x: DiffArray, p: LayerParams) -> DiffArray:
    """全连接层，作用于 (1, Cin) 或 (1, Cin, 1, 1) 输入"""
    if p.kind != LayerKind.FC:
        raise ArgumentError(f"linear 需要 fc 层，实际为: {p.kind}")
    flat = ops.reshape(x, (1, -1)) if x.ndim != 2 else x
    if flat.shape[1] != p.in_channels:
        raise ArgumentError(f"全连接输入维度 {flat.shape[1]} 与层定义 {p.in_channels} 不一致")
    out = ops.matmul(flat, _transpose(p.weight))
    if p.bias is not None:
        out = ops.add(out, ops.reshape(p.bias, (1, -1)))
    return out


def _transpose(w: DiffArray) -> DiffArray:
    return DiffArray(w.value.T, parents=(w,), op="transpose", backward_fn=lambda g: (g.T,))


def relu(x: DiffArray) -> DiffArray:
    return ops.relu(x)


def sigmoid(x: DiffArray) -> DiffArray:
    return ops.sigmoid(x)


def _pool(x: DiffArray, kind: str, axes, op_name: str) -> DiffArray:
    if kind == "avg":
        count = int(np.prod([x.shape[a] for a in axes]))
        value = x.value.mean(axis=axes, keepdims=True).astype(x.dtype)

        def backward(g):
            return (np.broadcast_to(g / count, x.shape).astype(x.dtype),)

        return DiffArray(value, parents=(x,), op=f"{op_name}[avg]", backward_fn=backward)

    if kind != "max":
        raise ArgumentError(f"池化类型必须为 avg 或 max，实际为: {kind}")
    # 把池化轴移到末尾并展平，argmax 返回扫描顺序中第一个最大值
    keep = [a for a in range(x.ndim) if a not in axes]
    moved = np.transpose(x.value, keep + list(axes))
    flat = moved.reshape(moved.shape[:len(keep)] + (-1,))
    index = np.argmax(flat, axis=-1)
    pooled = np.take_along_axis(flat, index[..., None], axis=-1)
    value = pooled.reshape([x.shape[a] if a in keep else 1 for a in range(x.ndim)])

    def backward(g):
        grad_flat = np.zeros_like(flat)
        np.put_along_axis(grad_flat, index[..., None], g.reshape(index.shape + (1,)), axis=-1)
        grad_moved = grad_flat.reshape(moved.shape)
        return (np.transpose(grad_moved, np.argsort(keep + list(axes))),)

    return DiffArray(value, parents=(x,), op=f"{op_name}[max]", backward_fn=backward)


def global_pool(x: DiffArray, kind: str) -> DiffArray:
    """逐通道全局池化: (1, C, H, W) -> (1, C, 1, 1)"""
    if x.ndim != 4:
        raise ArgumentError(f"输入必须为四维，实际形状: {x.shape}")
    return _pool(x, kind, (2, 3), "global_pool")


def spatial_pool(x: DiffArray, kind: str) -> DiffArray:
    """跨通道池化: (1, C, H, W) -> (1, 1, H, W)"""
    if x.ndim != 4:
        raise ArgumentError(f"输入必须为四维，实际形状: {x.shape}")
    return _pool(x, kind, (1,), "spatial_pool")


def normalize(x: DiffArray, p: LayerParams) -> DiffArray:
    """
    逐通道标准化 (x - mean) / sqrt(var + eps) * scale + shift

    参数:
        x: 输入 (1, C, H, W)
        p: norm 层参数(weight 为 scale，bias 为 shift)
    """
    if p.kind != LayerKind.NORM:
        raise ArgumentError(f"normalize 需要 norm 层，实际为: {p.kind}")
    _check_input(x, p)
    n = x.shape[2] * x.shape[3]
    mu = x.value.mean(axis=(2, 3), keepdims=True)
    var = x.value.var(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + NORM_EPS)
    xhat = (x.value - mu) * inv_std
    gamma = p.weight.value[None, :, None, None]
    out = xhat * gamma
    if p.bias is not None:
        out = out + p.bias.value[None, :, None, None]
    out = out.astype(x.dtype)

    def backward(g):
        dxhat = g * gamma
        grad_x = inv_std / n * (n * dxhat - dxhat.sum(axis=(2, 3), keepdims=True)
                                - xhat * (dxhat * xhat).sum(axis=(2, 3), keepdims=True))
        grads = [grad_x, (g * xhat).sum(axis=(0, 2, 3))]
        if p.bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, p.weight) if p.bias is None else (x, p.weight, p.bias)
    return DiffArray(out, parents=parents, op="normalize", backward_fn=backward)
