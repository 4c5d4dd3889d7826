"""
自动微分模块初始化文件
导出计算图节点、基础运算、网络层、优化器与检查点读写

导出内容：
- DiffArray / parameter / constant: 计算图节点
- ops: 可微基础运算
- layers: 卷积、转置卷积、全连接、池化、标准化层
- optim: ADAM 与学习率调度
- checkpoint: 检查点二进制容器
"""

from autodiff.engine import DiffArray, as_diff, constant, parameter
from autodiff import ops
from autodiff.layers import (
    LayerKind,
    LayerParams,
    conv2d,
    deconv2d,
    global_pool,
    kaiming_init,
    linear,
    normalize,
    relu,
    sigmoid,
    spatial_pool,
)
from autodiff.optim import AdamState, LrSchedule, adam_step, lr_at
from autodiff.checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    'DiffArray', 'as_diff', 'constant', 'parameter', 'ops',
    'LayerKind', 'LayerParams', 'conv2d', 'deconv2d', 'global_pool', 'kaiming_init',
    'linear', 'normalize', 'relu', 'sigmoid', 'spatial_pool',
    'AdamState', 'LrSchedule', 'adam_step', 'lr_at',
    'load_checkpoint', 'save_checkpoint',
]
