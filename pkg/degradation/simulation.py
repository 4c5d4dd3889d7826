"""
退化仿真模块
主要功能：按Wald协议由参考图像仿真低分辨率高光谱(LR-HSI)与高分辨率多光谱(HR-MSI)

实现说明：
1. 一维高斯模糊+抽取矩阵构造 P1、P2
2. 由波段区间构造盒状光谱响应 P3，或从CSV加载
3. 空间/光谱退化以及LR-MSI中间量的构造
"""

from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from degradation.models import NoiseSpec, SpatialDegradation, SpectralResponse
from tensor.core import HyperCube, mode_product
from tensor.exceptions import ArgumentError, FormatError

logger = logging.getLogger(__name__)

# Landsat-8 OLI 可见光/近红外波段(nm)
LANDSAT8_OLI_BANDS: List[Tuple[float, float]] = [
    (433.0, 453.0),  # 海岸/气溶胶
    (450.0, 515.0),  # 蓝
    (525.0, 600.0),  # 绿
    (630.0, 680.0),  # 红
    (845.0, 885.0),  # 近红外
]


def default_blur_sigma(ratio: int) -> float:
    """默认模糊标准差 sigma = 0.5 * ratio"""
    return 0.5 * ratio


def gaussian_decimation_matrix(full_dim: int, ratio: int, sigma: float) -> np.ndarray:
    """
    构造一维"高斯模糊后抽取"矩阵

    参数:
        full_dim: 高分辨率维度
        ratio: 抽取倍率
        sigma: 高斯核标准差(像素)

    返回:
        (full_dim/ratio) x full_dim 矩阵

    说明:
        模糊核截断于 ±floor(3σ)，边界零填充后逐行重新归一化；
        抽取保留每个块内偏移为 ratio//2 的样本
    """
    if ratio < 1 or full_dim < 1:
        raise ArgumentError(f"维度 {full_dim} 与倍率 {ratio} 必须为正")
    if full_dim % ratio != 0:
        raise ArgumentError(f"维度 {full_dim} 不能被倍率 {ratio} 整除")
    if not sigma > 0:
        raise ArgumentError(f"sigma 必须为正，实际为: {sigma}")

    radius = int(math.floor(3.0 * sigma))
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-(offsets.astype(np.float64) ** 2) / (2.0 * sigma ** 2))

    blur = np.zeros((full_dim, full_dim), dtype=np.float64)
    for i in range(full_dim):
        cols = i + offsets
        valid = (cols >= 0) & (cols < full_dim)
        blur[i, cols[valid]] = kernel[valid]
    blur /= blur.sum(axis=1, keepdims=True)

    rows = np.arange(full_dim // ratio) * ratio + ratio // 2
    return blur[rows]


def make_spatial_degradation(width: int, height: int, ratio: int,
                             sigma: Optional[float] = None) -> SpatialDegradation:
    """按宽高构造 P1、P2"""
    sigma = default_blur_sigma(ratio) if sigma is None else float(sigma)
    return SpatialDegradation(
        p1=gaussian_decimation_matrix(width, ratio, sigma),
        p2=gaussian_decimation_matrix(height, ratio, sigma),
        ratio=ratio,
        blur_sigma=sigma,
    )


def add_noise(z: HyperCube, n: NoiseSpec) -> HyperCube:
    """按噪声配置添加高斯噪声(关闭时原样返回)"""
    if not n.enabled or n.std == 0.0:
        return z
    rng = np.random.default_rng(n.seed)
    noise = rng.normal(0.0, n.std, size=z.dims).astype(z.dtype)
    return HyperCube(z.data + noise)


def degrade_spatial(z: HyperCube, d: SpatialDegradation,
                    n: Optional[NoiseSpec] = None) -> HyperCube:
    """
    空间退化 z x1 P1 x2 P2 (+噪声)

    参数:
        z: 高分辨率张量 (W, H, ·)
        d: 空间退化算子
        n: 噪声配置

    返回:
        (w, h, ·) 张量
    """
    if (z.dims[0], z.dims[1]) != d.high_dims:
        raise ArgumentError(f"输入空间维度 {z.dims[:2]} 与算子 {d.high_dims} 不一致")
    out = mode_product(z, d.p1.astype(z.dtype), 1)
    out = mode_product(out, d.p2.astype(z.dtype), 2)
    return add_noise(out, n or NoiseSpec())


def degrade_spectral(z: HyperCube, r: SpectralResponse,
                     n: Optional[NoiseSpec] = None) -> HyperCube:
    """
    光谱退化 z x3 P3 (+噪声)

    参数:
        z: 高光谱张量 (·, ·, S)
        r: 光谱响应
        n: 噪声配置

    返回:
        (·, ·, s) 张量
    """
    if z.dims[2] != r.hsi_bands:
        raise ArgumentError(f"输入波段数 {z.dims[2]} 与光谱响应 {r.hsi_bands} 不一致")
    out = mode_product(z, r.p3.astype(z.dtype), 3)
    return add_noise(out, n or NoiseSpec())


def srf_from_ranges(band_ranges: Sequence[Tuple[int, int]], total_bands: int) -> SpectralResponse:
    """
    由波段区间构造盒状光谱响应

    参数:
        band_ranges: 每个多光谱波段的闭区间 (start_band, end_band)
        total_bands: 高光谱波段总数

    返回:
        SpectralResponse，第i行在其区间内均匀分布
    """
    if not band_ranges:
        raise ArgumentError("波段区间列表不能为空")
    p3 = np.zeros((len(band_ranges), total_bands), dtype=np.float64)
    for row, (start, end) in enumerate(band_ranges):
        if not (0 <= start <= end < total_bands):
            raise ArgumentError(f"波段区间 ({start}, {end}) 超出 [0, {total_bands})")
        p3[row, start:end + 1] = 1.0 / (end - start + 1)
    return SpectralResponse(p3=p3, band_ranges=list(band_ranges))


def uniform_band_ranges(total_bands: int, msi_bands: int) -> List[Tuple[int, int]]:
    """把全部波段等分为 msi_bands 个连续区间"""
    if not 1 <= msi_bands < total_bands:
        raise ArgumentError(f"多光谱波段数 {msi_bands} 必须在 [1, {total_bands}) 内")
    edges = np.linspace(0, total_bands, msi_bands + 1).round().astype(int)
    return [(int(edges[i]), int(edges[i + 1]) - 1) for i in range(msi_bands)]


def landsat8_band_ranges(total_bands: int, wavelength_min: float,
                         wavelength_max: float) -> List[Tuple[int, int]]:
    """
    Landsat-8 OLI 盒状近似

    参数:
        total_bands: 高光谱波段数，假设中心波长在 [wavelength_min, wavelength_max] 上线性分布
        wavelength_min: 最短中心波长(nm)
        wavelength_max: 最长中心波长(nm)

    返回:
        落在该波长范围内的 OLI 波段对应的波段区间
    """
    if wavelength_max <= wavelength_min:
        raise ArgumentError("wavelength_max 必须大于 wavelength_min")
    centers = np.linspace(wavelength_min, wavelength_max, total_bands)
    ranges = []
    for low, high in LANDSAT8_OLI_BANDS:
        inside = np.nonzero((centers >= low) & (centers <= high))[0]
        if inside.size:
            ranges.append((int(inside[0]), int(inside[-1])))
    if not ranges:
        raise ArgumentError("给定波长范围内没有 Landsat-8 波段")
    return ranges


def load_srf_csv(path: str, total_bands: Optional[int] = None) -> SpectralResponse:
    """
    从CSV加载光谱响应：每行一个多光谱波段，S个逗号分隔的非负权重；加载后逐行归一化
    """
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                values = [float(v) for v in text.split(",")]
            except ValueError:
                raise FormatError("无法解析的权重", path=path, line=line_no)
            if any(v < 0 or not math.isfinite(v) for v in values):
                raise FormatError("权重必须为有限非负数", path=path, line=line_no)
            if sum(values) <= 0:
                raise FormatError("权重之和必须为正", path=path, line=line_no)
            if rows and len(values) != len(rows[0]):
                raise FormatError("各行权重个数不一致", path=path, line=line_no)
            rows.append(values)
    if not rows:
        raise FormatError("SRF文件为空", path=path)
    p3 = np.asarray(rows, dtype=np.float64)
    if total_bands is not None and p3.shape[1] != total_bands:
        raise FormatError(f"权重个数 {p3.shape[1]} 与波段数 {total_bands} 不一致", path=path)
    p3 /= p3.sum(axis=1, keepdims=True)
    logger.info(f"加载SRF文件: {path}, 形状 {p3.shape}")
    return SpectralResponse(p3=p3)


def make_lr_msi(x: HyperCube, y: HyperCube, d: SpatialDegradation,
                r: SpectralResponse) -> Tuple[HyperCube, HyperCube]:
    """
    构造两条路径的LR-MSI

    参数:
        x: LR-HSI (w, h, S)
        y: HR-MSI (W, H, s)
        d: 空间退化算子
        r: 光谱响应

    返回:
        (SRF(x), PSF(y))，维度均为 (w, h, s)
    """
    if (x.dims[0], x.dims[1]) != d.low_dims:
        raise ArgumentError(f"LR-HSI 空间维度 {x.dims[:2]} 与算子 {d.low_dims} 不一致")
    if y.dims[2] != r.msi_bands:
        raise ArgumentError(f"HR-MSI 波段数 {y.dims[2]} 与光谱响应 {r.msi_bands} 不一致")
    return degrade_spectral(x, r), degrade_spatial(y, d)


def simulate_pair(reference: HyperCube, d: SpatialDegradation, r: SpectralResponse,
                  noise: Optional[NoiseSpec] = None) -> Tuple[HyperCube, HyperCube]:
    """
    Wald协议仿真

    返回:
        (LR-HSI, HR-MSI)；两者噪声使用相邻种子以保持互相独立
    """
    noise = noise or NoiseSpec()
    hsi_noise = noise
    msi_noise = noise.model_copy(update={"seed": noise.seed + 1})
    lr_hsi = degrade_spatial(reference, d, hsi_noise)
    hr_msi = degrade_spectral(reference, r, msi_noise)
    logger.info(f"仿真完成: 参考 {reference.dims} -> LR-HSI {lr_hsi.dims}, HR-MSI {hr_msi.dims}")
    return lr_hsi, hr_msi
