"""
运行产物写出模块
主要功能：CSV 表格、PGM 灰度图、热力图取值范围与运行清单

实现说明：
1. PGM 由 Pillow 写出，二维数组 (W, H) 按宽 W、高 H 存储
2. 热力图按单张图的最小/最大值线性缩放到 0..255，常数图输出全黑
3. 运行清单记录配置回显、种子与依赖版本
"""

from importlib import metadata
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple
import csv
import logging
import platform
import sys

import numpy as np
from PIL import Image

from app.models.experiment import RunManifest

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("numpy", "scipy", "pydantic", "pydantic-settings", "Pillow")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_matrix_csv(path: str, matrix: np.ndarray, prefix: str):
    """写出二维矩阵，列名为 prefix1..prefixN"""
    matrix = np.asarray(matrix)
    header = [f"{prefix}{j + 1}" for j in range(matrix.shape[1])]
    write_csv(path, header, matrix.tolist())


def scale_to_uint8(values: np.ndarray) -> Tuple[np.ndarray, Tuple[float, float]]:
    """
    最小-最大线性缩放到 8 位灰度

    返回:
        (uint8 图像, (最小值, 最大值))
    """
    values = np.asarray(values, dtype=np.float64)
    low, high = float(values.min()), float(values.max())
    if high > low:
        scaled = np.round((values - low) / (high - low) * 255.0)
    else:
        scaled = np.zeros_like(values)
    return scaled.astype(np.uint8), (low, high)


def write_pgm(path: str, values: np.ndarray) -> Tuple[float, float]:
    """
    把 (W, H) 数组写成 PGM 灰度图

    返回:
        缩放所用的取值范围
    """
    image, value_range = scale_to_uint8(values)
    Image.fromarray(np.ascontiguousarray(image.T), mode="L").save(path, format="PPM")
    return value_range


def write_ranges(path: str, ranges: Mapping[str, Tuple[float, float]]):
    """热力图取值范围旁注文件，每行: 名称 最小值 最大值"""
    with open(path, "w", encoding="utf-8") as f:
        for name, (low, high) in ranges.items():
            f.write(f"{name} {low!r} {high!r}\n")


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(path: str, command: str, config: Dict[str, Any], seed: int,
                   outputs: List[str]) -> RunManifest:
    """
    写出运行清单

    参数:
        path: 输出路径(JSON)
        command: 子命令名称
        config: 配置回显
        seed: 随机种子
        outputs: 本次运行写出的文件

    返回:
        RunManifest
    """
    manifest = RunManifest(
        command=command,
        config=dict(config, argv=" ".join(sys.argv)),
        seed=seed,
        versions=package_versions(),
        outputs=list(outputs),
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(manifest.model_dump_json(indent=2))
    logger.info(f"运行清单已写出: {path}")
    return manifest
