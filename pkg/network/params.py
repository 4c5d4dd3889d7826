"""
网络参数模块
主要功能：按配置创建并初始化 CTFN、解码器与退化层的全部可学习参数

实现说明：
1. 各层参数按固定顺序创建并用同一个随机数生成器初始化，保证同种子同结果
2. 解码器因子 Θ_W、Θ_H、Θ_S 各自只有一个对象，
   被 LR-HSI、HR-MSI、HR-HSI 三个解码路径共同引用
3. named_parameters 返回确定顺序的 名称->叶子节点 映射
"""

from collections import OrderedDict
from typing import Dict, List, Optional
import logging

import numpy as np

from autodiff import ops
from autodiff.engine import DiffArray, parameter
from autodiff.layers import LayerKind, LayerParams, kaiming_init
from network.config import CtfnConfig
from network.degradation_layers import DegradationLayers
from network.initializers import interpolation_matrix
from tensor.exceptions import FormatError

logger = logging.getLogger(__name__)


class CtfnParams:
    """
    CTFN 参数集合

    属性说明：
    - config: 网络配置
    - layers: 层名 -> LayerParams(编码器、SSAB、SDAB、注意力、瓶颈、SFB、SUAB、变换层)
    - resample_w / resample_h: 变换层空间重采样矩阵 (n1 x W)、(n2 x H)
    - w_factor / h_factor: 共享空间因子 Θ_W (W x n1)、Θ_H (H x n2)
    - s_factor: 共享光谱因子 Θ_S，1x1 卷积 n3 -> S(无偏置)
    - degradation: PSF/SRF 层
    """

    def __init__(self, config: CtfnConfig, seed: int = 0,
                 degradation: Optional[DegradationLayers] = None):
        self.config = config
        self.seed = seed
        self.layers: Dict[str, LayerParams] = OrderedDict()
        rng = np.random.default_rng(seed)
        dtype = config.np_dtype
        n_s = config.n_s
        big_w, big_h, _ = config.msi_dims
        n1, n2, n3 = config.resolved_core_dims

        def add(name: str, kind: LayerKind, cin: int, cout: int, bias: bool = True):
            p = LayerParams.create(kind, cin, cout, bias=bias, dtype=dtype, name=name)
            self.layers[name] = kaiming_init(p, rng)

        add("enc_hsi.0", LayerKind.CONV3X3, config.hsi_bands, n_s)
        add("enc_hsi.1", LayerKind.CONV3X3, n_s, n_s)
        add("enc_msi.0", LayerKind.CONV3X3, config.msi_bands, n_s)
        add("enc_msi.1", LayerKind.CONV3X3, n_s, n_s)

        if config.use_ctfn:
            for i in range(1, config.stages + 1):
                add(f"ssab.{i}", LayerKind.CONV1X1, n_s, n_s)
                add(f"sdab.{i}.res_a", LayerKind.CONV3X3, n_s, n_s)
                add(f"sdab.{i}.res_b", LayerKind.CONV3X3, n_s, n_s)
                add(f"sdab.{i}.down", LayerKind.CONV2X2_S2, n_s, n_s)
            if config.spectral_attention_on:
                add("attention.fc1", LayerKind.FC, n_s, config.hidden_channels)
                add("attention.fc2", LayerKind.FC, config.hidden_channels, n_s)
            add("bottleneck", LayerKind.CONV3X3, 2 * n_s, n_s)
            for i in range(config.stages, 0, -1):
                if config.spatial_attention_on:
                    # 卷积后接标准化，偏置会被均值抵消
                    add(f"ssam.{i}.conv", LayerKind.CONV3X3, 2, 1, bias=False)
                    add(f"ssam.{i}.norm", LayerKind.NORM, 1, 1)
                add(f"sfb.{i}", LayerKind.CONV3X3, n_s, n_s)
                add(f"suab.{i}.conv1", LayerKind.CONV3X3, n_s, n_s)
                add(f"suab.{i}.conv2", LayerKind.CONV3X3, 2 * n_s, n_s)
                add(f"suab.{i}.up", LayerKind.DECONV2X2_S2, n_s, n_s)
        else:
            add("plain_fusion", LayerKind.CONV3X3, 2 * n_s, n_s)

        add("transform", LayerKind.CONV1X1, n_s, n3)
        self.resample_w = parameter(interpolation_matrix(n1, big_w, dtype), name="transform.resample_w")
        self.resample_h = parameter(interpolation_matrix(n2, big_h, dtype), name="transform.resample_h")

        self.w_factor = parameter(interpolation_matrix(big_w, n1, dtype), name="decoder.w_factor")
        self.h_factor = parameter(interpolation_matrix(big_h, n2, dtype), name="decoder.h_factor")
        s_layer = LayerParams.create(LayerKind.CONV1X1, n3, config.hsi_bands, bias=False,
                                     dtype=dtype, name="decoder.s_factor")
        # 参数名不带 .weight 后缀
        self.s_factor = parameter(kaiming_init(s_layer, rng).weight.value, name="decoder.s_factor")

        self.degradation = degradation or DegradationLayers(
            config.hsi_dims[:2], config.ratio, config.hsi_bands, config.msi_bands, dtype=dtype
        )
        logger.info(f"CTFN参数初始化完成: {self.count()} 个可学习数值, 种子 {seed}")

    def layer(self, name: str) -> LayerParams:
        return self.layers[name]

    def named_parameters(self, include_frozen: bool = False) -> Dict[str, DiffArray]:
        """返回确定顺序的可学习参数；include_frozen 时包含已冻结的退化层参数"""
        named: Dict[str, DiffArray] = OrderedDict()
        for layer in self.layers.values():
            for p in layer.parameters():
                named[p.name] = p
        for p in (self.resample_w, self.resample_h, self.w_factor, self.h_factor, self.s_factor):
            named[p.name] = p
        degradation = self.degradation.all_parameters() if include_frozen \
            else self.degradation.named_parameters()
        for name, p in degradation.items():
            named[f"degradation.{name}"] = p
        return named

    def parameter_groups(self) -> Dict[str, List[str]]:
        """按模块前缀分组的参数名(用于梯度可达性检查与日志)"""
        groups: Dict[str, List[str]] = OrderedDict()
        for name in self.named_parameters():
            groups.setdefault(name.split(".")[0], []).append(name)
        return groups

    def s_matrix(self) -> DiffArray:
        """Θ_S 的二维视图 (S x n3)"""
        return ops.reshape(self.s_factor, self.s_factor.shape[:2])

    def zero_grad(self):
        for p in self.named_parameters(include_frozen=True).values():
            p.zero_grad()

    def count(self) -> int:
        return int(sum(p.value.size for p in self.named_parameters().values()))

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """全部参数数值(包含冻结的退化层参数)，用于检查点"""
        return OrderedDict((name, p.value) for name, p in self.named_parameters(include_frozen=True).items())

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]):
        """从检查点数组恢复参数数值(原地写入，保持对象共享关系)"""
        for name, p in self.named_parameters(include_frozen=True).items():
            if name not in arrays:
                raise FormatError(f"检查点缺少参数: {name}")
            value = np.asarray(arrays[name])
            if value.shape != p.shape:
                raise FormatError(f"参数 {name} 形状 {value.shape} 与网络 {p.shape} 不一致")
            p.value = value.astype(p.dtype)
