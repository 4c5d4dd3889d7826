"""
训练模块初始化文件
导出损失函数、训练配置与训练会话
"""

from training.config import AblationSwitches, LossWeights, TrainConfig
from training.losses import LossTerms, joint_loss, norm_loss, psf_srf_loss, psf_srf_terms, rec_loss
from training.trainer import TRACE_COLUMNS, ForwardResult, Trainer, TrainResult, train

__all__ = [
    'AblationSwitches', 'LossWeights', 'TrainConfig',
    'LossTerms', 'joint_loss', 'norm_loss', 'psf_srf_loss', 'psf_srf_terms', 'rec_loss',
    'TRACE_COLUMNS', 'ForwardResult', 'Trainer', 'TrainResult', 'train',
]
