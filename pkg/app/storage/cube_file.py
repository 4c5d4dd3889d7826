"""
立方体文件读写模块
主要功能：读写自描述的高光谱立方体文件

实现说明：
1. 第1行为魔数 "HSICUBE1"，第2行为 ASCII 十进制 "W H S"
2. 其后为 W*H*S 个32位小端浮点数，按波段优先顺序(与 HyperCube.to_flat 一致)
3. 载荷长度与文件头不符或存在非有限值时报格式错误
"""

import logging

import numpy as np

from tensor.core import HyperCube
from tensor.exceptions import ArgumentError, FormatError

logger = logging.getLogger(__name__)

CUBE_MAGIC = b"HSICUBE1"
PAYLOAD_DTYPE = "<f4"


def write_cube(path: str, cube: HyperCube):
    """
    写出立方体文件(数值按32位浮点存储)

    参数:
        path: 输出路径
        cube: 待写出的立方体
    """
    w, h, s = cube.dims
    payload = cube.to_flat().astype(PAYLOAD_DTYPE)
    with open(path, "wb") as f:
        f.write(CUBE_MAGIC + b"\n")
        f.write(f"{w} {h} {s}\n".encode("ascii"))
        f.write(payload.tobytes())
    logger.info(f"写出立方体: {path}, 维度 {cube.dims}")


def read_cube(path: str) -> HyperCube:
    """
    读取立方体文件

    返回:
        HyperCube，数据类型 float32

    异常:
        FormatError: 魔数、文件头或载荷不合法
    """
    with open(path, "rb") as f:
        magic = f.readline().rstrip(b"\n")
        if magic != CUBE_MAGIC:
            raise FormatError(f"魔数应为 {CUBE_MAGIC.decode()}", path=path, line=1)
        header = f.readline()
        payload = f.read()

    try:
        fields = header.decode("ascii").split()
        dims = tuple(int(v) for v in fields)
    except (UnicodeDecodeError, ValueError):
        raise FormatError("文件头应为三个十进制整数 'W H S'", path=path, line=2)
    if len(dims) != 3 or min(dims) < 1:
        raise FormatError(f"文件头维度不合法: {header!r}", path=path, line=2)

    expected = dims[0] * dims[1] * dims[2] * 4
    if len(payload) != expected:
        raise FormatError(f"载荷长度 {len(payload)} 字节与文件头 {dims} 需要的 {expected} 字节不一致",
                          path=path)
    flat = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).astype(np.float32)
    try:
        cube = HyperCube.from_flat(flat, dims)
    except ArgumentError as e:
        raise FormatError(str(e), path=path)
    logger.info(f"读取立方体: {path}, 维度 {dims}")
    return cube
