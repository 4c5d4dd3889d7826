"""
可微基础运算
主要功能：逐元素运算、广播乘积、归约、形状变换与若干专用矩阵运算

实现说明：
- 每个运算计算正向数值并登记局部反向函数
- 输出 dtype 始终与第一个可微输入一致
- 广播运算的反向梯度通过 _unbroadcast 规约回原形状
"""

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

from autodiff.engine import DiffArray, as_diff
from tensor.exceptions import ArgumentError


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _pair(a, b) -> Tuple[DiffArray, DiffArray]:
    if isinstance(a, DiffArray):
        return a, as_diff(b, dtype=a.dtype)
    b = as_diff(b)
    return as_diff(a, dtype=b.dtype), b


def _result(value: np.ndarray, like: DiffArray) -> np.ndarray:
    return np.asarray(value, dtype=like.dtype)


def add(a, b) -> DiffArray:
    a, b = _pair(a, b)
    value = _result(a.value + b.value, a)
    return DiffArray(value, parents=(a, b), op="add",
                     backward_fn=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> DiffArray:
    a, b = _pair(a, b)
    value = _result(a.value - b.value, a)
    return DiffArray(value, parents=(a, b), op="sub",
                     backward_fn=lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)))


def mul(a, b) -> DiffArray:
    """逐元素/广播乘积"""
    a, b = _pair(a, b)
    value = _result(a.value * b.value, a)
    return DiffArray(value, parents=(a, b), op="mul",
                     backward_fn=lambda g: (_unbroadcast(g * b.value, a.shape),
                                            _unbroadcast(g * a.value, b.shape)))


def neg(a: DiffArray) -> DiffArray:
    return DiffArray(-a.value, parents=(a,), op="neg", backward_fn=lambda g: (-g,))


def scale(a: DiffArray, factor: float) -> DiffArray:
    """乘以常数标量"""
    value = _result(a.value * factor, a)
    return DiffArray(value, parents=(a,), op="scale", backward_fn=lambda g: (g * factor,))


def matmul(a, b) -> DiffArray:
    a, b = _pair(a, b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ArgumentError(f"矩阵乘法形状不匹配: {a.shape} @ {b.shape}")
    value = _result(a.value @ b.value, a)
    return DiffArray(value, parents=(a, b), op="matmul",
                     backward_fn=lambda g: (g @ b.value.T, a.value.T @ g))


def mode_product(x: DiffArray, m: DiffArray, axis: int) -> DiffArray:
    """
    沿指定轴的模积: out = moveaxis(tensordot(m, x, (1, axis)), 0, axis)

    参数:
        x: 输入数组
        m: 矩阵，列数须等于 x.shape[axis]
        axis: 作用轴(numpy 轴编号)
    """
    x, m = _pair(x, m)
    if m.ndim != 2 or m.shape[1] != x.shape[axis]:
        raise ArgumentError(f"模积形状不匹配: 矩阵 {m.shape}, 输入 {x.shape}, 轴 {axis}")
    value = _result(np.moveaxis(np.tensordot(m.value, x.value, axes=(1, axis)), 0, axis), x)

    def backward(g):
        g_front = np.moveaxis(g, axis, 0)
        x_front = np.moveaxis(x.value, axis, 0)
        rest = tuple(range(1, g_front.ndim))
        grad_m = np.tensordot(g_front, x_front, axes=(rest, rest))
        grad_x = np.moveaxis(np.tensordot(m.value.T, g_front, axes=(1, 0)), 0, axis)
        return grad_x, grad_m

    return DiffArray(value, parents=(x, m), op="mode_product", backward_fn=backward)


def relu(x: DiffArray) -> DiffArray:
    mask = x.value > 0
    value = np.where(mask, x.value, 0).astype(x.dtype)
    return DiffArray(value, parents=(x,), op="relu", backward_fn=lambda g: (g * mask,))


def sigmoid(x: DiffArray) -> DiffArray:
    value = _result(special.expit(x.value), x)
    return DiffArray(value, parents=(x,), op="sigmoid",
                     backward_fn=lambda g: (g * value * (1 - value),))


def absolute(x: DiffArray) -> DiffArray:
    value = np.abs(x.value)
    return DiffArray(value, parents=(x,), op="abs", backward_fn=lambda g: (g * np.sign(x.value),))


def square(x: DiffArray) -> DiffArray:
    value = x.value * x.value
    return DiffArray(value, parents=(x,), op="square", backward_fn=lambda g: (2 * g * x.value,))


def sum_all(x: DiffArray) -> DiffArray:
    value = _result(np.sum(x.value), x)
    return DiffArray(value, parents=(x,), op="sum",
                     backward_fn=lambda g: (np.broadcast_to(g, x.shape).astype(x.dtype),))


def mean(x: DiffArray) -> DiffArray:
    n = x.value.size
    value = _result(np.mean(x.value), x)
    return DiffArray(value, parents=(x,), op="mean",
                     backward_fn=lambda g: (np.broadcast_to(g / n, x.shape).astype(x.dtype),))


def reshape(x: DiffArray, shape: Tuple[int, ...]) -> DiffArray:
    value = x.value.reshape(shape)
    return DiffArray(value, parents=(x,), op="reshape",
                     backward_fn=lambda g: (g.reshape(x.shape),))


def concat(items: Sequence[DiffArray], axis: int = 1) -> DiffArray:
    """沿指定轴拼接，顺序即输入顺序"""
    if not items:
        raise ArgumentError("拼接列表不能为空")
    dtype = items[0].dtype
    items = [as_diff(item, dtype=dtype) for item in items]
    for item in items[1:]:
        other = tuple(s for k, s in enumerate(item.shape) if k != axis)
        first = tuple(s for k, s in enumerate(items[0].shape) if k != axis)
        if other != first:
            raise ArgumentError(f"拼接形状不匹配: {items[0].shape} 与 {item.shape}")
    value = np.concatenate([item.value for item in items], axis=axis)
    bounds = np.cumsum([0] + [item.shape[axis] for item in items])

    def backward(g):
        return tuple(np.take(g, np.arange(bounds[k], bounds[k + 1]), axis=axis)
                     for k in range(len(items)))

    return DiffArray(value, parents=items, op="concat", backward_fn=backward)


def clip_min(x: DiffArray, lower: float) -> DiffArray:
    """下限截断，被截断处梯度为0"""
    mask = x.value >= lower
    value = np.where(mask, x.value, lower).astype(x.dtype)
    return DiffArray(value, parents=(x,), op="clip_min", backward_fn=lambda g: (g * mask,))


def row_normalize(x: DiffArray) -> DiffArray:
    """二维矩阵逐行归一化，使每行之和为1(要求行和为正)"""
    if x.ndim != 2:
        raise ArgumentError(f"row_normalize 需要二维输入，实际形状: {x.shape}")
    totals = x.value.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ArgumentError("row_normalize 要求每行之和为正")
    value = x.value / totals

    def backward(g):
        inner = np.sum(g * value, axis=1, keepdims=True)
        return ((g - inner) / totals,)

    return DiffArray(value, parents=(x,), op="row_normalize", backward_fn=backward)


def trace_quadratic(f: DiffArray, laplacian: np.ndarray) -> DiffArray:
    """
    tr(F^T L F)，L 为对称常量矩阵

    返回:
        标量节点，对 F 的梯度为 2 L F
    """
    laplacian = np.asarray(laplacian, dtype=f.dtype)
    if f.ndim != 2 or laplacian.shape != (f.shape[0], f.shape[0]):
        raise ArgumentError(f"trace_quadratic 形状不匹配: F {f.shape}, L {laplacian.shape}")
    lf = laplacian @ f.value
    value = _result(np.sum(f.value * lf), f)
    return DiffArray(value, parents=(f,), op="trace_quadratic",
                     backward_fn=lambda g: (2 * g * lf,))


def block_kernel_matrix(kernel: DiffArray, n_out: int) -> DiffArray:
    """
    由一维核构造步长等于核长的卷积矩阵 I_{n_out} ⊗ k^T

    参数:
        kernel: 长度为 scale 的一维核
        n_out: 输出长度

    返回:
        n_out x (n_out * scale) 矩阵
    """
    if kernel.ndim != 1:
        raise ArgumentError(f"卷积核必须是一维，实际形状: {kernel.shape}")
    scale_len = kernel.shape[0]
    value = np.kron(np.eye(n_out, dtype=kernel.dtype), kernel.value[None, :])

    def backward(g):
        blocks = g.reshape(n_out, n_out, scale_len)
        return (np.einsum("rrt->t", blocks),)

    return DiffArray(value, parents=(kernel,), op="block_kernel_matrix", backward_fn=backward)


def upsample_nearest(x: DiffArray, factor: int) -> DiffArray:
    """最近邻上采样(作用于最后两个轴)"""
    value = np.repeat(np.repeat(x.value, factor, axis=-2), factor, axis=-1)

    def backward(g):
        shape = g.shape[:-2] + (x.shape[-2], factor, x.shape[-1], factor)
        return (g.reshape(shape).sum(axis=(-1, -3)),)

    return DiffArray(value, parents=(x,), op="upsample_nearest", backward_fn=backward)


def stop_gradient(x: DiffArray) -> DiffArray:
    return DiffArray(x.value, op="stop_gradient")


def ones_like(x: DiffArray, shape: Optional[Tuple[int, ...]] = None) -> DiffArray:
    return DiffArray(np.ones(shape or x.shape, dtype=x.dtype), op="ones")
