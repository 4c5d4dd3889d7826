"""
流形正则模块初始化文件
"""

from manifold.graph import (
    DEFAULT_K,
    LaplacianGraph,
    knn_adjacency,
    manifold_loss,
    spatial_graphs_from_hr_msi,
    spatial_manifold_term,
    spectral_graph_from_lr_hsi,
    spectral_manifold_term,
)

__all__ = [
    'DEFAULT_K', 'LaplacianGraph', 'knn_adjacency', 'manifold_loss',
    'spatial_graphs_from_hr_msi', 'spatial_manifold_term',
    'spectral_graph_from_lr_hsi', 'spectral_manifold_term',
]
