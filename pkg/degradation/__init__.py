"""
退化仿真包
导出退化算子类型、仿真函数与合成场景
"""

from degradation.models import NoiseSpec, SpatialDegradation, SpectralResponse
from degradation.simulation import (
    add_noise,
    degrade_spatial,
    degrade_spectral,
    gaussian_decimation_matrix,
    landsat8_band_ranges,
    load_srf_csv,
    make_lr_msi,
    make_spatial_degradation,
    simulate_pair,
    srf_from_ranges,
    uniform_band_ranges,
)
from degradation.scenes import make_toy_scene

__all__ = [
    'NoiseSpec',
    'SpatialDegradation',
    'SpectralResponse',
    'add_noise',
    'degrade_spatial',
    'degrade_spectral',
    'gaussian_decimation_matrix',
    'landsat8_band_ranges',
    'load_srf_csv',
    'make_lr_msi',
    'make_spatial_degradation',
    'simulate_pair',
    'srf_from_ranges',
    'uniform_band_ranges',
    'make_toy_scene',
]
