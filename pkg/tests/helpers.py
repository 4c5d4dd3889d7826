"""
测试辅助函数
随机立方体与中心差分梯度检查
"""

from typing import Callable

import numpy as np

from autodiff.engine import DiffArray
from tensor.core import HyperCube

FD_STEP = 1e-6


def random_cube(rng: np.random.Generator, dims, low: float = 0.0, high: float = 1.0) -> HyperCube:
    return HyperCube(rng.uniform(low, high, size=dims))


def numeric_grad(loss: Callable[[], DiffArray], param: DiffArray, step: float = FD_STEP,
                 indices=None) -> np.ndarray:
    """
    中心差分梯度

    参数:
        loss: 以当前参数数值重新前向并返回标量节点的函数
        param: 被扰动的叶子节点(原地修改 value)
        indices: 需要检查的扁平下标，为空时检查全部元素
    """
    flat = param.value.reshape(-1)
    grad = np.zeros(flat.shape)
    if indices is None:
        indices = range(flat.size)
    for idx in indices:
        original = flat[idx]
        flat[idx] = original + step
        plus = loss().item()
        flat[idx] = original - step
        minus = loss().item()
        flat[idx] = original
        grad[idx] = (plus - minus) / (2 * step)
    return grad.reshape(param.shape)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def check_grad(loss: Callable[[], DiffArray], params, tol: float = 1e-6, indices=None):
    """对每个参数比较反向传播梯度与中心差分梯度"""
    for p in params:
        p.zero_grad()
    loss().backward()
    analytic = [np.array(p.grad, copy=True) for p in params]
    for p, a in zip(params, analytic):
        n = numeric_grad(loss, p, indices=indices)
        if indices is not None:
            mask = np.zeros(p.value.size, dtype=bool)
            mask[list(indices)] = True
            a = a.reshape(-1)[mask]
            n = n.reshape(-1)[mask]
        err = relative_error(a, n)
        assert err < tol, f"{p.name or p.op} 梯度相对误差 {err:.3e} 超过 {tol:.0e}"
