"""
网络模块初始化文件
导出 CTFN 配置、参数、前向与解码接口
"""

from network.config import CtfnConfig
from network.params import CtfnParams
from network.degradation_layers import DegradationLayers
from network.blocks import (
    array_to_cube,
    cube_to_array,
    encode,
    fuse_bottleneck,
    sdab_forward,
    sfb_suab_forward,
    spectral_attention,
    ssab_forward,
    ssam,
)
from network.ctfn import FeaturePyramid, core_from_inputs
from network.decoder import DecodeTarget, core_cube, decode, extract_factors

__all__ = [
    'CtfnConfig', 'CtfnParams', 'DegradationLayers',
    'array_to_cube', 'cube_to_array', 'encode', 'fuse_bottleneck', 'sdab_forward',
    'sfb_suab_forward', 'spectral_attention', 'ssab_forward', 'ssam',
    'FeaturePyramid', 'core_from_inputs',
    'DecodeTarget', 'core_cube', 'decode', 'extract_factors',
]
