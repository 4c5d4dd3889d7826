"""
参数检查点模块
主要功能：有序命名数组的二进制容器读写

文件布局(全部小端)：
1. 魔数 b"CTFNCKPT"，u32 版本号，u32 数组个数
2. 每个数组：u16 名称长度，UTF-8 名称，u8 类型码，u8 维数，各维 u32，数据(行优先)

实现说明：
1. 类型码 0=float32，1=float64，2=int64；float32 网络仍写 32 位数据
2. float64 与整数数组按原类型写出，恢复后逐位一致
3. 0 维数组(轮数等标量)保持 0 维
"""

from typing import Dict, Mapping
import logging
import struct

import numpy as np

from tensor.exceptions import FormatError

logger = logging.getLogger(__name__)

MAGIC = b"CTFNCKPT"
VERSION = 2

DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<i8")}


def _dtype_code(arr: np.ndarray) -> int:
    if arr.dtype == np.float64:
        return 1
    if np.issubdtype(arr.dtype, np.integer) or arr.dtype == np.bool_:
        return 2
    return 0


def save_checkpoint(path: str, arrays: Mapping[str, np.ndarray]):
    """
    保存检查点

    参数:
        path: 输出文件路径
        arrays: 名称到数组的有序映射，按插入顺序写出
    """
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", VERSION, len(arrays)))
            for name, value in arrays.items():
                encoded = name.encode("utf-8")
                arr = np.asarray(value)
                code = _dtype_code(arr)
                f.write(struct.pack("<H", len(encoded)))
                f.write(encoded)
                f.write(struct.pack("<BB", code, arr.ndim))
                if arr.ndim:
                    f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
                f.write(np.asarray(arr, dtype=DTYPE_CODES[code]).reshape(-1).tobytes())
        logger.info(f"检查点已保存: {path} ({len(arrays)} 个数组)")
    except OSError as e:
        logger.error(f"检查点保存失败: {str(e)}")
        raise


def _read(f, size: int, path: str) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise FormatError("检查点文件被截断", path=path)
    return data


def load_checkpoint(path: str) -> Dict[str, np.ndarray]:
    """
    读取检查点

    返回:
        名称到数组的有序字典，数组保持写出时的类型与形状

    异常:
        FormatError: 魔数、版本、类型码或长度不符
    """
    arrays: Dict[str, np.ndarray] = {}
    with open(path, "rb") as f:
        if _read(f, len(MAGIC), path) != MAGIC:
            raise FormatError("不是有效的检查点文件(魔数不符)", path=path)
        version, count = struct.unpack("<II", _read(f, 8, path))
        if version != VERSION:
            raise FormatError(f"不支持的检查点版本: {version}", path=path)
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read(f, 2, path))
            try:
                name = _read(f, name_len, path).decode("utf-8")
            except UnicodeDecodeError:
                raise FormatError("数组名称不是有效的UTF-8", path=path)
            code, ndim = struct.unpack("<BB", _read(f, 2, path))
            if code not in DTYPE_CODES:
                raise FormatError(f"数组 {name} 的类型码无效: {code}", path=path)
            dtype = DTYPE_CODES[code]
            shape = struct.unpack(f"<{ndim}I", _read(f, 4 * ndim, path)) if ndim else ()
            size = int(np.prod(shape)) if ndim else 1
            data = np.frombuffer(_read(f, dtype.itemsize * size, path), dtype=dtype)
            arrays[name] = data.reshape(shape).astype(dtype.type)
        if f.read(1):
            raise FormatError("检查点文件末尾存在多余数据", path=path)
    logger.info(f"检查点已加载: {path} ({len(arrays)} 个数组)")
    return arrays
