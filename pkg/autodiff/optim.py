"""
优化器模块
主要功能：ADAM 优化器与线性衰减学习率调度

实现说明：
1. AdamState 按参数名保存一阶/二阶矩，支持序列化到检查点
2. adam_step 原地更新参数数值，保持参数 dtype
3. lr_at 在 decay_start_epoch 之前保持基础学习率，之后线性衰减到0
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping
import logging

import numpy as np

from autodiff.engine import DiffArray
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """
    ADAM 优化器状态

    属性说明：
    - m / v: 以参数名为键的一阶/二阶矩(零初始化)
    - t: 已执行的步数
    - beta1, beta2, eps: ADAM 超参数
    - base_lr: 基础学习率
    """
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    base_lr: float = 5e-3

    @classmethod
    def for_params(cls, params: Mapping[str, DiffArray], base_lr: float = 5e-3) -> "AdamState":
        state = cls(base_lr=base_lr)
        for name, p in params.items():
            state.m[name] = np.zeros_like(p.value)
            state.v[name] = np.zeros_like(p.value)
        return state


def adam_step(params: Mapping[str, DiffArray], grads: Mapping[str, np.ndarray],
              state: AdamState, lr: float) -> AdamState:
    """
    执行一步 ADAM 更新

    参数:
        params: 参数名到叶子节点的映射(原地更新 value)
        grads: 参数名到梯度的映射；缺失的梯度视为0
        state: 优化器状态(原地更新)
        lr: 本步学习率

    返回:
        更新后的状态
    """
    state.t += 1
    bias1 = 1.0 - state.beta1 ** state.t
    bias2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.value)
        g = np.asarray(g)
        if g.shape != p.shape:
            raise ArgumentError(f"参数 {name} 梯度形状 {g.shape} 与参数形状 {p.shape} 不一致")
        if name not in state.m:
            state.m[name] = np.zeros_like(p.value)
            state.v[name] = np.zeros_like(p.value)
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        state.m[name] = m.astype(p.dtype)
        state.v[name] = v.astype(p.dtype)
        m_hat = m / bias1
        v_hat = v / bias2
        p.value = (p.value - lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype)
    return state


@dataclass(frozen=True)
class LrSchedule:
    """
    线性衰减学习率调度

    属性说明：
    - base_lr: 基础学习率
    - total_epochs: 总轮数
    - decay_start_epoch: 开始衰减的轮数
    """
    base_lr: float = 5e-3
    total_epochs: int = 10000
    decay_start_epoch: int = 3000

    def __post_init__(self):
        if self.total_epochs < 1:
            raise ArgumentError(f"total_epochs 必须为正，实际为: {self.total_epochs}")
        if not 0 <= self.decay_start_epoch <= self.total_epochs:
            raise ArgumentError(
                f"decay_start_epoch {self.decay_start_epoch} 必须在 [0, {self.total_epochs}] 内"
            )
        if self.base_lr < 0:
            raise ArgumentError(f"base_lr 不能为负，实际为: {self.base_lr}")


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    """返回第 epoch 轮(从0开始)的学习率"""
    if not 0 <= epoch < schedule.total_epochs:
        raise ArgumentError(f"epoch {epoch} 超出 [0, {schedule.total_epochs})")
    if epoch < schedule.decay_start_epoch:
        return schedule.base_lr
    span = schedule.total_epochs - schedule.decay_start_epoch
    return schedule.base_lr * (schedule.total_epochs - epoch) / span
