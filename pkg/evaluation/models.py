"""
评价结果数据模型
定义六项质量指标的汇总结构

包含：
1. 指标报告 MetricsReport
"""

from typing import Dict, List

from pydantic import BaseModel, Field

METRIC_NAMES = ("rmse", "psnr", "sam", "ergas", "ssim", "uiqi")


class MetricsReport(BaseModel):
    """
    指标报告

    属性说明：
    - rmse: 均方根误差(最优 0)
    - psnr: 逐波段平均峰值信噪比，dB(最优 +∞，以 300 表示)
    - sam: 平均光谱角，度(最优 0)
    - ergas: 相对全局综合误差(最优 0)
    - ssim: 结构相似度(最优 1)
    - uiqi: 通用图像质量指数(最优 1)
    - psnr_per_band: 各波段 PSNR
    """
    rmse: float = Field(..., ge=0, description="均方根误差")
    psnr: float = Field(..., description="平均峰值信噪比(dB)")
    sam: float = Field(..., ge=0, le=180, description="平均光谱角(度)")
    ergas: float = Field(..., ge=0, description="ERGAS")
    ssim: float = Field(..., description="结构相似度")
    uiqi: float = Field(..., description="通用图像质量指数")
    psnr_per_band: List[float] = Field(default_factory=list, description="各波段PSNR(dB)")

    def summary(self) -> Dict[str, float]:
        """六项指标(不含逐波段PSNR)"""
        return {name: getattr(self, name) for name in METRIC_NAMES}
