"""
张量代数模块
主要功能：三阶稠密张量的存储、模展开/折叠、模积以及Tucker重构

实现说明：
1. HyperCube 以 (n_w, n_h, n_b) 逻辑索引 t[i, j, k] 保存数据
2. 文件/扁平布局为波段优先、波段内行优先：
   flat[k * n_h * n_w + j * n_w + i] = t[i, j, k]
3. 模展开的列顺序：其余两个模按升序排列，且编号较小的模变化最快
   - mode 1: col = j + n_h * k
   - mode 2: col = i + n_w * k
   - mode 3: col = i + n_w * j
   fold 是 unfold 的精确逆
"""

from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np
from scipy import linalg

from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

# 稠密矩阵直接使用二维 numpy 数组(行优先)
DenseMatrix = np.ndarray
Dims = Tuple[int, int, int]

VALID_MODES = (1, 2, 3)


def _check_mode(mode: int) -> int:
    if mode not in VALID_MODES:
        raise ArgumentError(f"模编号必须为1、2或3，实际为: {mode}")
    return mode - 1


def _as_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ArgumentError(f"{name} 必须是非空二维矩阵，实际形状: {m.shape}")
    return m


@dataclass(frozen=True)
class HyperCube:
    """
    超立方体(三阶张量)

    属性说明：
    - data: 形状为 (n_w, n_h, n_b) 的只读数组，反射率，无量纲
    """
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, copy=True)
        if arr.dtype.kind not in "f":
            arr = arr.astype(np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ArgumentError(f"HyperCube 需要三维非空数据，实际形状: {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("HyperCube 数据包含 NaN 或 Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.data.shape)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def astype(self, dtype) -> "HyperCube":
        return HyperCube(self.data.astype(dtype))

    def to_flat(self) -> np.ndarray:
        """按波段优先、波段内行优先的规范布局展开为一维数组"""
        return np.ascontiguousarray(self.data.transpose(2, 1, 0)).reshape(-1)

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Dims) -> "HyperCube":
        """从规范布局的一维数组构造"""
        n_w, n_h, n_b = dims
        flat = np.asarray(flat)
        if flat.size != n_w * n_h * n_b:
            raise ArgumentError(f"数据长度 {flat.size} 与维度 {dims} 不一致")
        return cls(flat.reshape(n_b, n_h, n_w).transpose(2, 1, 0))

    @classmethod
    def zeros(cls, dims: Dims, dtype=np.float64) -> "HyperCube":
        return cls(np.zeros(dims, dtype=dtype))

    def __eq__(self, other) -> bool:
        if not isinstance(other, HyperCube):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True)
class TuckerFactors:
    """
    Tucker 分解结果

    属性说明：
    - core: 核张量，维度 (n1, n2, n3)
    - w_factor: 模1因子矩阵 (W x n1)
    - h_factor: 模2因子矩阵 (H x n2)
    - s_factor: 模3因子矩阵 (S x n3)
    """
    core: HyperCube
    w_factor: DenseMatrix
    h_factor: DenseMatrix
    s_factor: DenseMatrix

    def __post_init__(self):
        factors = []
        for name, factor, rank in zip(("w_factor", "h_factor", "s_factor"),
                                      (self.w_factor, self.h_factor, self.s_factor),
                                      self.core.dims):
            factor = np.array(_as_matrix(factor, name), copy=True)
            if factor.shape[1] != rank:
                raise ArgumentError(f"{name} 列数 {factor.shape[1]} 与核张量维度 {rank} 不一致")
            if rank > factor.shape[0]:
                raise ArgumentError(f"{name} 只允许压缩：秩 {rank} 超过维度 {factor.shape[0]}")
            factor.setflags(write=False)
            factors.append(factor)
        object.__setattr__(self, "w_factor", factors[0])
        object.__setattr__(self, "h_factor", factors[1])
        object.__setattr__(self, "s_factor", factors[2])

    @property
    def ranks(self) -> Dims:
        return self.core.dims

    @property
    def full_dims(self) -> Dims:
        return (self.w_factor.shape[0], self.h_factor.shape[0], self.s_factor.shape[0])


def unfold(t: HyperCube, mode: int) -> DenseMatrix:
    """
    模展开

    参数:
        t: 输入张量
        mode: 模编号(1/2/3)

    返回:
        dims[mode] x (其余两维乘积) 的矩阵，列顺序见模块说明
    """
    axis = _check_mode(mode)
    moved = np.moveaxis(t.data, axis, 0)
    return np.reshape(moved, (moved.shape[0], -1), order="F")


def fold(m: DenseMatrix, mode: int, dims: Dims) -> HyperCube:
    """
    模折叠(unfold 的逆运算)

    参数:
        m: 展开矩阵
        mode: 模编号
        dims: 目标张量维度 (n_w, n_h, n_b)

    返回:
        折叠后的张量
    """
    axis = _check_mode(mode)
    m = _as_matrix(m)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ArgumentError(f"dims 必须是三元组，实际为: {dims}")
    rest = tuple(d for k, d in enumerate(dims) if k != axis)
    if m.shape != (dims[axis], rest[0] * rest[1]):
        raise ArgumentError(f"矩阵形状 {m.shape} 与维度 {dims} (mode {mode}) 不一致")
    moved = np.reshape(m, (dims[axis],) + rest, order="F")
    return HyperCube(np.moveaxis(moved, 0, axis))


def mode_product(t: HyperCube, m: DenseMatrix, mode: int) -> HyperCube:
    """
    模积 t x_mode m

    参数:
        t: 输入张量
        m: 矩阵，列数须等于 t.dims[mode]
        mode: 模编号

    返回:
        dims[mode] 被替换为 m 行数的张量
    """
    axis = _check_mode(mode)
    m = _as_matrix(m)
    if m.shape[1] != t.dims[axis]:
        raise ArgumentError(
            f"模积内维度不匹配: 矩阵列数 {m.shape[1]}，张量第{mode}维 {t.dims[axis]}"
        )
    product = np.tensordot(m, t.data, axes=(1, axis))
    return HyperCube(np.moveaxis(product, 0, axis))


def tucker_reconstruct(f: TuckerFactors) -> HyperCube:
    """Tucker 重构: C x1 W x2 H x3 S"""
    z = mode_product(f.core, f.w_factor, 1)
    z = mode_product(z, f.h_factor, 2)
    return mode_product(z, f.s_factor, 3)


def hosvd(t: HyperCube, ranks: Dims) -> TuckerFactors:
    """
    截断高阶奇异值分解

    参数:
        t: 输入张量
        ranks: 各模保留的秩 (n1, n2, n3)

    返回:
        TuckerFactors，因子为各模展开的前导左奇异向量
    """
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3:
        raise ArgumentError(f"ranks 必须是三元组，实际为: {ranks}")
    factors = []
    for mode, (rank, dim) in enumerate(zip(ranks, t.dims), start=1):
        if rank < 1 or rank > dim:
            raise ArgumentError(f"第{mode}模的秩 {rank} 超出范围 [1, {dim}]")
        u, _, _ = linalg.svd(unfold(t, mode), full_matrices=False)
        factors.append(u[:, :rank])

    core = t
    for mode, factor in enumerate(factors, start=1):
        core = mode_product(core, factor.T, mode)
    logger.debug(f"HOSVD完成: 维度 {t.dims} -> 核 {core.dims}")
    return TuckerFactors(core=core, w_factor=factors[0], h_factor=factors[1], s_factor=factors[2])
