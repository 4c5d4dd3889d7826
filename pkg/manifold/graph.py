"""
流形图模块
主要功能：KNN 加权邻接图、拉普拉斯矩阵与光谱/空间流形正则项

实现说明：
1. 样本两两平方距离由 scipy.spatial.distance.cdist 计算
2. 每个样本取 k 个最近邻(不含自身，稳定排序，距离相同时编号小者优先)，
   有向邻接掩码取逻辑或对称化
3. 边权 A(i, j) = exp(-||x_i - x_j||^2 / sigma^2)，L = D - A
4. 光谱图取 LR-HSI 的模3展开行，空间图取 HR-MSI 的模1、模2展开行，
   因而图的规模为 S x S、W x W、H x H，不构造 HW x HW 像素图
5. 图在训练前构造一次，训练中保持不变
"""

from dataclasses import dataclass
from typing import Tuple, Union
import logging

import numpy as np
from scipy.spatial import distance

from autodiff import ops
from autodiff.engine import DiffArray
from tensor.core import HyperCube, unfold
from tensor.exceptions import ArgumentError

logger = logging.getLogger(__name__)

DEFAULT_K = 8
SigmaSpec = Union[float, str]


@dataclass(frozen=True)
class LaplacianGraph:
    """
    KNN 拉普拉斯图

    属性说明：
    - adjacency: 邻接矩阵 A (n x n)，对称，取值 [0, 1]，对角为0
    - degree: 度向量(D 的对角元)
    - laplacian: L = D - A
    - k: 近邻数
    - sigma: 核宽度
    """
    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    k: int
    sigma: float

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]


def _resolve_sigma(sigma: SigmaSpec, sorted_dist: np.ndarray, k: int) -> float:
    if isinstance(sigma, str):
        if sigma != "auto":
            raise ArgumentError(f"sigma 必须为正数或 'auto'，实际为: {sigma}")
        # 各样本到第 k 个近邻距离的均值
        value = float(np.mean(sorted_dist[:, k - 1]))
        return value if value > 0 else 1.0
    sigma = float(sigma)
    if not sigma > 0:
        raise ArgumentError(f"sigma 必须为正，实际为: {sigma}")
    return sigma


def knn_adjacency(samples: np.ndarray, k: int = DEFAULT_K, sigma: SigmaSpec = "auto",
                  feature_stride: int = 1) -> LaplacianGraph:
    """
    构造 KNN 加权图

    参数:
        samples: 样本矩阵，每行一个样本
        k: 近邻数
        sigma: 核宽度或 "auto"
        feature_stride: 特征列的抽样步长(1 表示使用全部特征)

    返回:
        LaplacianGraph
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ArgumentError(f"样本必须是二维矩阵，实际形状: {samples.shape}")
    n = samples.shape[0]
    if k < 1 or k >= n:
        raise ArgumentError(f"近邻数 k={k} 必须在 [1, {n}) 内")
    if feature_stride < 1:
        raise ArgumentError(f"feature_stride 必须为正，实际为: {feature_stride}")
    samples = samples[:, ::feature_stride]

    sq_dist = distance.cdist(samples, samples, metric="sqeuclidean")
    ranking = sq_dist.copy()
    np.fill_diagonal(ranking, np.inf)
    order = np.argsort(ranking, axis=1, kind="stable")[:, :k]
    sorted_dist = np.sqrt(np.take_along_axis(sq_dist, order, axis=1))
    sigma_value = _resolve_sigma(sigma, sorted_dist, k)

    mask = np.zeros((n, n), dtype=bool)
    mask[np.arange(n)[:, None], order] = True
    mask |= mask.T
    adjacency = np.where(mask, np.exp(-sq_dist / sigma_value ** 2), 0.0)
    np.fill_diagonal(adjacency, 0.0)
    degree = adjacency.sum(axis=1)
    laplacian = np.diag(degree) - adjacency
    for arr in (adjacency, degree, laplacian):
        arr.setflags(write=False)
    return LaplacianGraph(adjacency=adjacency, degree=degree, laplacian=laplacian, k=k, sigma=sigma_value)


def spectral_graph_from_lr_hsi(x: HyperCube, k: int = DEFAULT_K, sigma: SigmaSpec = "auto",
                               feature_stride: int = 1) -> LaplacianGraph:
    """光谱图 L_S：样本为 LR-HSI 模3展开的各行(每个波段一个样本)"""
    graph = knn_adjacency(unfold(x, 3), k, sigma, feature_stride)
    logger.info(f"光谱图构造完成: {graph.size}x{graph.size}, k={k}, sigma={graph.sigma:.4g}")
    return graph


def spatial_graphs_from_hr_msi(y: HyperCube, k: int = DEFAULT_K, sigma: SigmaSpec = "auto",
                               feature_stride: int = 1) -> Tuple[LaplacianGraph, LaplacianGraph]:
    """空间图 (L_W, L_H)：样本分别为 HR-MSI 模1、模2展开的各行"""
    graph_w = knn_adjacency(unfold(y, 1), k, sigma, feature_stride)
    graph_h = knn_adjacency(unfold(y, 2), k, sigma, feature_stride)
    logger.info(f"空间图构造完成: L_W {graph_w.size}x{graph_w.size}, L_H {graph_h.size}x{graph_h.size}")
    return graph_w, graph_h


def spectral_manifold_term(s_factor: DiffArray, graph_s: LaplacianGraph, beta1: float) -> DiffArray:
    """β1 · tr(S^T L_S S)"""
    return ops.scale(ops.trace_quadratic(s_factor, graph_s.laplacian), beta1)


def spatial_manifold_term(w_factor: DiffArray, h_factor: DiffArray, graph_w: LaplacianGraph,
                          graph_h: LaplacianGraph, beta2: float) -> DiffArray:
    """β2 · (tr(W^T L_W W) + tr(H^T L_H H))"""
    total = ops.add(ops.trace_quadratic(w_factor, graph_w.laplacian),
                    ops.trace_quadratic(h_factor, graph_h.laplacian))
    return ops.scale(total, beta2)


def manifold_loss(w_factor: DiffArray, h_factor: DiffArray, s_factor: DiffArray,
                  graph_s: LaplacianGraph, graph_w: LaplacianGraph, graph_h: LaplacianGraph,
                  beta1: float, beta2: float) -> DiffArray:
    """
    流形正则项

    参数:
        w_factor / h_factor / s_factor: 当前解码器因子 (W x n1)、(H x n2)、(S x n3)
        graph_s / graph_w / graph_h: 光谱图与两个空间图
        beta1 / beta2: 光谱/空间权重

    返回:
        β1·tr(S^T L_S S) + β2·(tr(W^T L_W W) + tr(H^T L_H H))，标量节点
    """
    return ops.add(spectral_manifold_term(s_factor, graph_s, beta1),
                   spatial_manifold_term(w_factor, h_factor, graph_w, graph_h, beta2))
