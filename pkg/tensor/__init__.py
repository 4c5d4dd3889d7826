"""
张量代数包
导出三阶张量类型与模运算
"""

from tensor.core import (
    DenseMatrix,
    HyperCube,
    TuckerFactors,
    fold,
    hosvd,
    mode_product,
    tucker_reconstruct,
    unfold,
)
from tensor.exceptions import ArgumentError, FormatError, FusionError, NumericalError

__all__ = [
    'DenseMatrix',
    'HyperCube',
    'TuckerFactors',
    'fold',
    'hosvd',
    'mode_product',
    'tucker_reconstruct',
    'unfold',
    'ArgumentError',
    'FormatError',
    'FusionError',
    'NumericalError',
]
