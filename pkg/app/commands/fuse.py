"""
融合子命令
主要功能：
1. 读取 LR-HSI 与 HR-MSI，无监督训练 CTFN 并输出融合 HR-HSI
2. 给出 operators 时固定 PSF/SRF(非盲模式)
3. 支持从检查点恢复训练

实现说明：
- 输出 fused.cube、checkpoint.ckpt、loss_trace.csv、run_manifest.json 与 JSON 运行日志
- 全部配置项回显到运行日志
"""

from typing import List
import argparse
import logging
import os

from app.config import settings
from app.logging_config import attach_run_log, detach_run_log
from app.models.experiment import ExperimentConfig
from app.storage.artifacts import write_csv, write_manifest
from app.storage.cube_file import read_cube, write_cube
from app.storage.experiment_config import load_experiment_config
from autodiff.checkpoint import load_checkpoint
from network.config import CtfnConfig
from network.degradation_layers import DegradationLayers
from tensor.exceptions import ArgumentError, FormatError
from training.trainer import TRACE_COLUMNS, Trainer

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.ckpt"


def load_operators(path: str, network_config: CtfnConfig) -> DegradationLayers:
    """从仿真写出的算子文件构造固定退化层"""
    arrays = load_checkpoint(path)
    try:
        p1, p2, p3 = arrays["p1"], arrays["p2"], arrays["p3"]
    except KeyError as e:
        raise FormatError(f"算子文件缺少条目: {str(e)}", path=path)
    w, h, bands = network_config.hsi_dims
    big_w, big_h, msi_bands = network_config.msi_dims
    if p1.shape != (w, big_w) or p2.shape != (h, big_h) or p3.shape != (msi_bands, bands):
        raise FormatError(f"算子形状 {p1.shape}, {p2.shape}, {p3.shape} 与输入维度不一致", path=path)
    return DegradationLayers.from_matrices(p1, p2, p3, dtype=network_config.np_dtype)


def write_trace(path: str, trace):
    rows = ([int(row[0])] + [float(v) for v in row[1:]] for row in trace)
    write_csv(path, TRACE_COLUMNS, rows)


def run_fuse(config: ExperimentConfig) -> List[str]:
    """
    执行融合训练

    参数:
        config: 实验配置，需要 lr_hsi 与 hr_msi

    返回:
        写出的文件路径列表
    """
    if not config.lr_hsi or not config.hr_msi:
        raise ArgumentError("fuse 需要配置 lr_hsi 与 hr_msi")
    x = read_cube(config.lr_hsi)
    y = read_cube(config.hr_msi)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    handler = attach_run_log(os.path.join(out, settings.run_log_name))
    try:
        for key, value in config.model_dump().items():
            logger.info(f"配置 {key} = {value}")
        network_config = config.network_config(x.dims, y.dims)
        degradation = load_operators(config.operators, network_config) if config.operators else None
        checkpoint_path = os.path.join(out, CHECKPOINT_FILE)
        trainer = Trainer(x, y, config.train_config(checkpoint_path), network_config, degradation)
        if config.resume:
            trainer.restore(config.resume)
        result = trainer.fit()

        fused_path = os.path.join(out, "fused.cube")
        trace_path = os.path.join(out, "loss_trace.csv")
        write_cube(fused_path, result.fused)
        write_trace(trace_path, result.trace)
        outputs = [fused_path, checkpoint_path, trace_path, os.path.join(out, settings.run_log_name)]
        manifest_path = os.path.join(out, "run_manifest.json")
        write_manifest(manifest_path, "fuse", config.model_dump(mode="json"), config.seed, outputs)
        return outputs + [manifest_path]
    except Exception as e:
        logger.error(f"融合失败: {str(e)}")
        raise
    finally:
        detach_run_log(handler)


def add_parser(subparsers):
    parser = subparsers.add_parser("fuse", help="无监督训练并输出融合 HR-HSI")
    parser.add_argument("--config", required=True, help="实验配置文件(key = value)")
    parser.set_defaults(handler=handle)
    return parser


def handle(args: argparse.Namespace) -> int:
    run_fuse(load_experiment_config(args.config))
    return 0
