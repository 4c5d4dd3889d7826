"""
评价模块初始化文件
导出六项质量指标、逐像素误差图与最近邻基线
"""

from evaluation.models import METRIC_NAMES, MetricsReport
from evaluation.metrics import (
    PSNR_CAP,
    ergas,
    evaluate,
    psnr,
    psnr_per_band,
    rmse,
    rmse_map,
    sam,
    sam_map,
    ssim,
    uiqi,
)
from evaluation.baselines import nearest_upsample

__all__ = [
    'METRIC_NAMES', 'MetricsReport', 'PSNR_CAP',
    'ergas', 'evaluate', 'psnr', 'psnr_per_band', 'rmse', 'rmse_map', 'sam', 'sam_map',
    'ssim', 'uiqi', 'nearest_upsample',
]
