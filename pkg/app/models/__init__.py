"""
数据模型初始化文件
导出命令行使用的实验配置与运行清单模型
"""

from app.models.experiment import PATH_KEYS, ExperimentConfig, RunManifest

__all__ = [
    'PATH_KEYS',
    'ExperimentConfig',
    'RunManifest',
]
