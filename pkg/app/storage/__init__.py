"""
存储模块初始化文件
导出立方体文件、实验配置文件与运行产物的读写函数
"""

from app.storage.cube_file import CUBE_MAGIC, read_cube, write_cube
from app.storage.experiment_config import load_experiment_config, parse_key_values, write_experiment_config
from app.storage.artifacts import (
    scale_to_uint8,
    write_csv,
    write_manifest,
    write_matrix_csv,
    write_pgm,
    write_ranges,
)

__all__ = [
    'CUBE_MAGIC',
    'read_cube',
    'write_cube',
    'load_experiment_config',
    'parse_key_values',
    'write_experiment_config',
    'scale_to_uint8',
    'write_csv',
    'write_manifest',
    'write_matrix_csv',
    'write_pgm',
    'write_ranges',
]
