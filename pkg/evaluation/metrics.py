"""
质量评价指标模块
主要功能：RMSE、PSNR、SAM、ERGAS、SSIM、UIQI 六项指标与逐像素误差图

实现说明：
1. 输入为维度相同的 HyperCube (W, H, S)，全部按 float64 计算
2. PSNR 逐波段计算后取平均，峰值为参考波段的最大绝对值；误差为0时记为上限 300 dB
3. SAM 以度为单位，任一光谱为零向量的像素不参与平均
4. SSIM 使用 11x11、σ=1.5 的高斯窗(图像较小时窗口缩小到图像尺寸)，'valid' 模式
5. UIQI 使用 8x8 滑动窗口，方差为总体方差
6. SSIM/UIQI 写成两个比值的乘积，输入相同时结果恰为1
"""

from typing import Tuple
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from evaluation.models import MetricsReport
from tensor.core import HyperCube
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

PSNR_CAP = 300.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
UIQI_WINDOW = 8


def _pair(reference: HyperCube, fused: HyperCube) -> Tuple[np.ndarray, np.ndarray]:
    if reference.dims != fused.dims:
        raise ArgumentError(f"参考图像 {reference.dims} 与融合结果 {fused.dims} 维度不一致")
    return reference.data.astype(np.float64), fused.data.astype(np.float64)


def band_peak(ref_band: np.ndarray) -> float:
    """波段峰值：最大绝对值，全零波段取1"""
    peak = float(np.max(np.abs(ref_band)))
    return peak if peak > 0 else 1.0


def rmse(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = _pair(reference, fused)
    return float(np.sqrt(np.mean((ref - fus) ** 2)))


def band_rmse(reference: HyperCube, fused: HyperCube) -> np.ndarray:
    """逐波段 RMSE，长度 S"""
    ref, fus = _pair(reference, fused)
    return np.sqrt(np.mean((ref - fus) ** 2, axis=(0, 1)))


def psnr_per_band(reference: HyperCube, fused: HyperCube) -> np.ndarray:
    """逐波段 PSNR(dB)，上限 PSNR_CAP"""
    errors = band_rmse(reference, fused)
    values = np.empty_like(errors)
    for b, err in enumerate(errors):
        if err == 0:
            values[b] = PSNR_CAP
        else:
            values[b] = min(PSNR_CAP, 20.0 * np.log10(band_peak(reference.data[:, :, b]) / err))
    return values


def psnr(reference: HyperCube, fused: HyperCube) -> float:
    return float(np.mean(psnr_per_band(reference, fused)))


def sam_map(reference: HyperCube, fused: HyperCube) -> np.ndarray:
    """
    逐像素光谱角(度)

    返回:
        (W, H) 数组，零向量像素为0
    """
    ref, fus = _pair(reference, fused)
    ref_norm = np.linalg.norm(ref, axis=2)
    fus_norm = np.linalg.norm(fus, axis=2)
    valid = (ref_norm > 0) & (fus_norm > 0)
    angles = np.zeros(ref_norm.shape, dtype=np.float64)
    if np.any(valid):
        u = ref[valid] / ref_norm[valid][:, None]
        v = fus[valid] / fus_norm[valid][:, None]
        angles[valid] = np.degrees(2.0 * np.arctan2(np.linalg.norm(u - v, axis=1),
                                                    np.linalg.norm(u + v, axis=1)))
    return angles


def sam(reference: HyperCube, fused: HyperCube) -> float:
    """平均光谱角(度)，不含零向量像素；全部为零向量时为0"""
    ref, fus = _pair(reference, fused)
    valid = (np.linalg.norm(ref, axis=2) > 0) & (np.linalg.norm(fus, axis=2) > 0)
    if not np.any(valid):
        return 0.0
    return float(np.mean(sam_map(reference, fused)[valid]))


def ergas(reference: HyperCube, fused: HyperCube, ratio: int) -> float:
    """
    ERGAS = 100/ratio · sqrt(mean_b (RMSE_b / μ_b)^2)

    参考均值为0的波段不参与计算
    """
    if ratio <= 0:
        raise ArgumentError(f"ratio 必须为正，实际为: {ratio}")
    errors = band_rmse(reference, fused)
    means = reference.data.astype(np.float64).mean(axis=(0, 1))
    valid = means != 0
    if not np.all(valid):
        logger.warning(f"{int(np.sum(~valid))} 个波段参考均值为0，ERGAS 中忽略")
    if not np.any(valid):
        return 0.0
    return float(100.0 / ratio * np.sqrt(np.mean((errors[valid] / means[valid]) ** 2)))


def gaussian_window(size: int, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """归一化二维高斯窗"""
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def ssim_band(ref: np.ndarray, fus: np.ndarray, peak: float) -> float:
    """单波段 SSIM"""
    size = min(SSIM_WINDOW, ref.shape[0], ref.shape[1])
    window = gaussian_window(size)

    def filt(a: np.ndarray) -> np.ndarray:
        return signal.correlate2d(a, window, mode="valid")

    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    mu_x, mu_y = filt(ref), filt(fus)
    var_x = filt(ref * ref) - mu_x * mu_x
    var_y = filt(fus * fus) - mu_y * mu_y
    cov = filt(ref * fus) - mu_x * mu_y
    luminance = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    structure = (2.0 * cov + c2) / (var_x + var_y + c2)
    return float(np.mean(luminance * structure))


def ssim(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = _pair(reference, fused)
    return float(np.mean([ssim_band(ref[:, :, b], fus[:, :, b], band_peak(ref[:, :, b]))
                          for b in range(ref.shape[2])]))


def uiqi_band(ref: np.ndarray, fus: np.ndarray) -> float:
    """单波段 UIQI(8x8 滑动窗口平均)"""
    size = min(UIQI_WINDOW, ref.shape[0], ref.shape[1])
    wx = sliding_window_view(ref, (size, size)).reshape(-1, size * size)
    wy = sliding_window_view(fus, (size, size)).reshape(-1, size * size)
    mx, my = wx.mean(axis=1), wy.mean(axis=1)
    vx, vy = wx.var(axis=1), wy.var(axis=1)
    cov = ((wx - mx[:, None]) * (wy - my[:, None])).mean(axis=1)

    var_sum = vx + vy
    mean_sq = mx * mx + my * my
    # 方差或均值为0时对应因子取1，两者均为0时 Q=1
    q_var = np.divide(2.0 * cov, var_sum, out=np.ones_like(var_sum), where=var_sum != 0)
    q_mean = np.divide(2.0 * mx * my, mean_sq, out=np.ones_like(mean_sq), where=mean_sq != 0)
    return float(np.mean(q_var * q_mean))


def uiqi(reference: HyperCube, fused: HyperCube) -> float:
    ref, fus = _pair(reference, fused)
    return float(np.mean([uiqi_band(ref[:, :, b], fus[:, :, b]) for b in range(ref.shape[2])]))


def rmse_map(reference: HyperCube, fused: HyperCube) -> np.ndarray:
    """逐像素 RMSE(跨波段)，(W, H)"""
    ref, fus = _pair(reference, fused)
    return np.sqrt(np.mean((ref - fus) ** 2, axis=2))


def evaluate(reference: HyperCube, fused: HyperCube, ratio: int) -> MetricsReport:
    """
    计算全部六项指标

    参数:
        reference: 参考 HR-HSI
        fused: 融合结果
        ratio: 空间倍率(用于 ERGAS)

    返回:
        MetricsReport
    """
    try:
        per_band = psnr_per_band(reference, fused)
        report = MetricsReport(
            rmse=rmse(reference, fused),
            psnr=float(np.mean(per_band)),
            sam=sam(reference, fused),
            ergas=ergas(reference, fused, ratio),
            ssim=ssim(reference, fused),
            uiqi=uiqi(reference, fused),
            psnr_per_band=[float(v) for v in per_band],
        )
        logger.info(
            f"评价完成: RMSE={report.rmse:.5f}, PSNR={report.psnr:.3f}dB, SAM={report.sam:.3f}°, "
            f"ERGAS={report.ergas:.4f}, SSIM={report.ssim:.4f}, UIQI={report.uiqi:.4f}"
        )
        return report
    except Exception as e:
        logger.error(f"指标计算失败: {str(e)}")
        raise
