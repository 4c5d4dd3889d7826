"""
评价子命令
主要功能：
1. 计算融合结果相对参考图像的六项指标与逐波段 PSNR
2. 输出逐像素 RMSE 与 SAM 热力图(PGM)及其取值范围
3. 配置给出 lr_hsi 时附带最近邻上采样基线的指标
"""

from typing import List
import argparse
import logging
import os

from app.models.experiment import ExperimentConfig
from app.storage.artifacts import write_csv, write_manifest, write_pgm, write_ranges
from app.storage.cube_file import read_cube
from app.storage.experiment_config import load_experiment_config
from evaluation.baselines import nearest_upsample
from evaluation.metrics import evaluate, rmse_map, sam_map
from evaluation.models import METRIC_NAMES
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)


def run_evaluate(config: ExperimentConfig) -> List[str]:
    """
    执行评价

    参数:
        config: 实验配置，需要 reference 与 fused

    返回:
        写出的文件路径列表
    """
    if not config.reference or not config.fused:
        raise ArgumentError("evaluate 需要配置 reference 与 fused")
    reference = read_cube(config.reference)
    fused = read_cube(config.fused)
    if reference.dims != fused.dims:
        raise ArgumentError(f"参考图像 {reference.dims} 与融合结果 {fused.dims} 维度不一致")

    reports = {"fused": evaluate(reference, fused, config.ratio)}
    if config.lr_hsi:
        baseline = nearest_upsample(read_cube(config.lr_hsi), config.ratio)
        reports["nearest"] = evaluate(reference, baseline, config.ratio)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    paths = {name: os.path.join(out, name) for name in
             ("metrics.csv", "psnr_per_band.csv", "rmse_map.pgm", "sam_map.pgm", "heatmap_ranges.txt")}

    write_csv(paths["metrics.csv"], ("method",) + METRIC_NAMES,
              ([method] + [report.summary()[m] for m in METRIC_NAMES] for method, report in reports.items()))
    per_band = zip(*(report.psnr_per_band for report in reports.values()))
    write_csv(paths["psnr_per_band.csv"], ["band"] + [f"psnr_{method}" for method in reports],
              ([band] + list(values) for band, values in enumerate(per_band, start=1)))

    ranges = {
        "rmse_map": write_pgm(paths["rmse_map.pgm"], rmse_map(reference, fused)),
        "sam_map": write_pgm(paths["sam_map.pgm"], sam_map(reference, fused)),
    }
    write_ranges(paths["heatmap_ranges.txt"], ranges)

    outputs = list(paths.values())
    manifest_path = os.path.join(out, "run_manifest.json")
    write_manifest(manifest_path, "evaluate", config.model_dump(mode="json"), config.seed, outputs)
    return outputs + [manifest_path]


def add_parser(subparsers):
    parser = subparsers.add_parser("evaluate", help="计算质量指标并输出误差热力图")
    parser.add_argument("--config", required=True, help="实验配置文件(key = value)")
    parser.set_defaults(handler=handle)
    return parser


def handle(args: argparse.Namespace) -> int:
    run_evaluate(load_experiment_config(args.config))
    return 0
