"""
仿真子命令
主要功能：
1. 由参考 HR-HSI 按 Wald 协议生成 LR-HSI 与 HR-MSI
2. 写出退化算子，供非盲融合与测试使用
3. --toy 模式生成合成参考场景与可直接使用的实验配置

实现说明：
- 光谱响应来源：uniform:N、landsat8(按 wavelength_min/max 映射)、file:<csv>
- 相同配置与种子得到逐字节相同的输出
"""

from typing import List
import argparse
import logging
import os

from app.models.experiment import ExperimentConfig
from app.storage.artifacts import write_manifest
from app.storage.cube_file import read_cube, write_cube
from app.storage.experiment_config import load_experiment_config, write_experiment_config
from autodiff.checkpoint import save_checkpoint
from degradation.models import SpectralResponse
from degradation.scenes import make_toy_scene
from degradation.simulation import (
    landsat8_band_ranges,
    load_srf_csv,
    make_spatial_degradation,
    simulate_pair,
    srf_from_ranges,
    uniform_band_ranges,
)
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

OPERATORS_FILE = "operators.ckpt"
TOY_CONFIG_FILE = "experiment.conf"
TOY_EPOCHS = 2000
TOY_DECAY_START = 600


def resolve_srf(source: str, total_bands: int, wavelength_min: float,
                wavelength_max: float) -> SpectralResponse:
    """
    按配置字符串构造光谱响应

    参数:
        source: uniform:N | landsat8 | file:<csv>
        total_bands: 高光谱波段数
    """
    kind, _, arg = source.partition(":")
    if kind == "uniform":
        return srf_from_ranges(uniform_band_ranges(total_bands, int(arg)), total_bands)
    if kind == "landsat8":
        return srf_from_ranges(landsat8_band_ranges(total_bands, wavelength_min, wavelength_max), total_bands)
    if kind == "file":
        return load_srf_csv(arg, total_bands)
    raise ArgumentError(f"未知的光谱响应来源: {source}")


def run_simulate(config: ExperimentConfig) -> List[str]:
    """
    执行仿真

    参数:
        config: 实验配置，需要 reference

    返回:
        写出的文件路径列表
    """
    if not config.reference:
        raise ArgumentError("simulate 需要配置 reference")
    reference = read_cube(config.reference)
    w, h, bands = reference.dims
    if w % config.ratio or h % config.ratio:
        raise ArgumentError(f"参考图像空间维度 {(w, h)} 不能被倍率 {config.ratio} 整除")

    d = make_spatial_degradation(w, h, config.ratio, config.blur_sigma)
    r = resolve_srf(config.srf, bands, config.wavelength_min, config.wavelength_max)
    lr_hsi, hr_msi = simulate_pair(reference, d, r, config.noise_spec())

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    outputs = [os.path.join(out, "lr_hsi.cube"), os.path.join(out, "hr_msi.cube"),
               os.path.join(out, OPERATORS_FILE)]
    write_cube(outputs[0], lr_hsi)
    write_cube(outputs[1], hr_msi)
    save_checkpoint(outputs[2], {"p1": d.p1, "p2": d.p2, "p3": r.p3})

    manifest_path = os.path.join(out, "run_manifest.json")
    write_manifest(manifest_path, "simulate", config.model_dump(mode="json"), config.seed, outputs)
    logger.info(f"仿真输出: LR-HSI {lr_hsi.dims}, HR-MSI {hr_msi.dims}, 目录 {out}")
    return outputs + [manifest_path]


def run_toy(output_dir: str, seed: int = 0) -> List[str]:
    """
    生成 32x32x16 合成场景并仿真，另写出一份指向这些文件的实验配置

    返回:
        写出的文件路径列表
    """
    os.makedirs(output_dir, exist_ok=True)
    reference_path = os.path.join(output_dir, "reference.cube")
    write_cube(reference_path, make_toy_scene(seed=seed))

    values = {
        "reference": "reference.cube",
        "lr_hsi": "lr_hsi.cube",
        "hr_msi": "hr_msi.cube",
        "fused": "fused.cube",
        "output_dir": ".",
        "ratio": 4,
        "srf": "uniform:4",
        "epochs": TOY_EPOCHS,
        "decay_start_epoch": TOY_DECAY_START,
        "seed": seed,
    }
    config_path = os.path.join(output_dir, TOY_CONFIG_FILE)
    write_experiment_config(config_path, values)
    outputs = run_simulate(load_experiment_config(config_path))
    return [reference_path, config_path] + outputs


def add_parser(subparsers):
    parser = subparsers.add_parser("simulate", help="按 Wald 协议由参考图像生成 LR-HSI/HR-MSI")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="实验配置文件(key = value)")
    group.add_argument("--toy", metavar="OUTDIR", help="生成合成场景并仿真到该目录")
    parser.add_argument("--seed", type=int, default=0, help="--toy 模式的随机种子")
    parser.set_defaults(handler=handle)
    return parser


def handle(args: argparse.Namespace) -> int:
    if args.toy:
        run_toy(args.toy, args.seed)
    else:
        run_simulate(load_experiment_config(args.config))
    return 0
