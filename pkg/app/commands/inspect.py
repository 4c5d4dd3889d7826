"""
检查点查看子命令
主要功能：导出核张量切片(PGM)、三个因子矩阵(CSV)与上采样特征 F_up 切片(PGM)

实现说明：
1. 切片序号从1开始，沿光谱核维度 n3 取 core[:, :, k-1]
2. 超出 n3 的序号被跳过并记录警告，全部越界时报参数错误
3. 因子矩阵形状：W x n1、H x n2、S x n3
4. F_up 按上采样阶段编号(1 为最粗一级)，切片序号同样作用于通道维，越界通道直接跳过
"""

from typing import List, Sequence
import argparse
import logging
import os

from app.storage.artifacts import write_matrix_csv, write_pgm
from autodiff.checkpoint import load_checkpoint
from tensor.exceptions import ArgumentError, FormatError

logger = logging.getLogger(__name__)

DEFAULT_SLICES = (1, 20, 40)
FACTOR_KEYS = {
    "w_factor": "param/decoder.w_factor",
    "h_factor": "param/decoder.h_factor",
    "s_factor": "param/decoder.s_factor",
}
FEATURE_PREFIX = "feature/f_up."


def parse_slices(text: str) -> List[int]:
    try:
        slices = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ArgumentError(f"--slices 应为逗号分隔的整数，实际为: {text}")
    if not slices or min(slices) < 1:
        raise ArgumentError(f"切片序号从1开始，实际为: {text}")
    return slices


def _write_features(arrays, output_dir: str, slices: Sequence[int]) -> List[str]:
    keys = sorted((key for key in arrays if key.startswith(FEATURE_PREFIX)),
                  key=lambda key: int(key[len(FEATURE_PREFIX):]))
    if not keys:
        logger.warning("检查点中没有 F_up 特征，跳过特征切片导出")
        return []
    outputs = []
    for key in keys:
        feature = arrays[key]
        stage = key[len(FEATURE_PREFIX):]
        for k in slices:
            if k > feature.shape[0]:
                continue
            path = os.path.join(output_dir, f"f_up_{stage}_slice_{k}.pgm")
            write_pgm(path, feature[k - 1])
            outputs.append(path)
    return outputs


def run_inspect(checkpoint: str, output_dir: str, slices: Sequence[int] = DEFAULT_SLICES) -> List[str]:
    """
    导出检查点中的核张量切片与因子矩阵

    参数:
        checkpoint: 融合训练写出的检查点
        output_dir: 输出目录
        slices: 光谱核维度上的切片序号(从1开始)

    返回:
        写出的文件路径列表
    """
    arrays = load_checkpoint(checkpoint)
    missing = [key for key in ["core"] + list(FACTOR_KEYS.values()) if key not in arrays]
    if missing:
        raise FormatError(f"检查点缺少条目: {', '.join(missing)}", path=checkpoint)
    core = arrays["core"]
    if core.ndim != 3:
        raise FormatError(f"核张量应为三维，实际形状: {core.shape}", path=checkpoint)

    n3 = core.shape[2]
    valid = [k for k in slices if k <= n3]
    for k in slices:
        if k > n3:
            logger.warning(f"切片序号 {k} 超出核张量光谱维 {n3}，已跳过")
    if not valid:
        raise ArgumentError(f"所有切片序号 {list(slices)} 都超出核张量光谱维 {n3}")

    os.makedirs(output_dir, exist_ok=True)
    outputs = []
    for k in valid:
        path = os.path.join(output_dir, f"core_slice_{k}.pgm")
        write_pgm(path, core[:, :, k - 1])
        outputs.append(path)
    for name, key in FACTOR_KEYS.items():
        matrix = arrays[key]
        if matrix.ndim == 4:
            matrix = matrix[:, :, 0, 0]
        path = os.path.join(output_dir, f"{name}.csv")
        write_matrix_csv(path, matrix, prefix="r")
        outputs.append(path)
    outputs += _write_features(arrays, output_dir, slices)
    logger.info(f"检查点导出完成: 核张量 {core.shape}, {len(valid)} 个切片 -> {output_dir}")
    return outputs


def add_parser(subparsers):
    parser = subparsers.add_parser("inspect", help="导出核张量切片、因子矩阵与 F_up 特征切片")
    parser.add_argument("--checkpoint", required=True, help="融合训练写出的检查点")
    parser.add_argument("--output", required=True, help="输出目录")
    parser.add_argument("--slices", default=",".join(str(k) for k in DEFAULT_SLICES),
                        help="核张量切片序号，逗号分隔，从1开始(默认 1,20,40)")
    parser.set_defaults(handler=handle)
    return parser


def handle(args: argparse.Namespace) -> int:
    run_inspect(args.checkpoint, args.output, parse_slices(args.slices))
    return 0
