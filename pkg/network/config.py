"""
网络配置模块
定义核心张量融合网络(CTFN)的结构参数与消融开关

包含：
1. 输入维度与空间倍率推导的阶段数
2. 特征通道数、核张量维度与注意力压缩比
3. SSAM / CTFN 结构消融开关
"""

from typing import Optional, Tuple
import math

import numpy as np
from pydantic import BaseModel, Field, model_validator

from tensor.exceptions import ArgumentError


class CtfnConfig(BaseModel):
    """
    CTFN 结构配置

    属性说明：
    - hsi_dims: LR-HSI 维度 (w, h, S)
    - msi_dims: HR-MSI 维度 (W, H, s)
    - n_s: 每个阶段的特征通道数
    - core_ratio: 空间核维度压缩比(n1 = round(core_ratio * W))
    - core_dims: 显式核维度 (n1, n2, n3)，为空时按默认规则推导
    - spectral_core: n3 的默认上限
    - reduction: 注意力全连接层压缩比
    - use_*: 结构消融开关
    - dtype: 训练使用的浮点类型
    """
    hsi_dims: Tuple[int, int, int] = Field(..., description="LR-HSI 维度 (w, h, S)")
    msi_dims: Tuple[int, int, int] = Field(..., description="HR-MSI 维度 (W, H, s)")
    n_s: int = Field(64, ge=1, description="特征通道数")
    core_ratio: float = Field(0.85, gt=0, le=1, description="空间核维度压缩比")
    core_dims: Optional[Tuple[int, int, int]] = Field(None, description="显式核维度 (n1, n2, n3)")
    spectral_core: int = Field(40, ge=1, description="光谱核维度默认上限")
    reduction: int = Field(4, ge=1, description="注意力全连接压缩比")
    use_ctfn: bool = Field(True, description="是否使用完整CTFN(否则为普通卷积核提取器)")
    use_ssam: bool = Field(True, description="是否使用空谱注意力模块")
    use_spectral_attention: bool = Field(True, description="是否使用光谱注意力")
    use_spatial_attention: bool = Field(True, description="是否使用空间注意力")
    dtype: str = Field("float32", description="训练浮点类型(float32/float64)")

    @model_validator(mode="after")
    def _check_dims(self) -> "CtfnConfig":
        w, h, bands = self.hsi_dims
        big_w, big_h, msi_bands = self.msi_dims
        if min(w, h, bands, big_w, big_h, msi_bands) < 1:
            raise ArgumentError(f"维度必须为正: HSI {self.hsi_dims}, MSI {self.msi_dims}")
        if big_w % w or big_h % h:
            raise ArgumentError(f"HR-MSI 空间维度 {(big_w, big_h)} 不能被 LR-HSI {(w, h)} 整除")
        if big_w // w != big_h // h:
            raise ArgumentError(f"宽高方向倍率不一致: {big_w // w} 与 {big_h // h}")
        ratio = big_w // w
        if ratio < 2 or ratio & (ratio - 1):
            raise ArgumentError(f"空间倍率 {ratio} 必须是2的整数次幂")
        if msi_bands >= bands:
            raise ArgumentError(f"多光谱波段数 {msi_bands} 必须小于高光谱波段数 {bands}")
        if self.dtype not in ("float32", "float64"):
            raise ArgumentError(f"dtype 必须为 float32 或 float64，实际为: {self.dtype}")
        if self.core_dims is not None:
            n1, n2, n3 = self.core_dims
            if not (1 <= n1 <= big_w and 1 <= n2 <= big_h and 1 <= n3 <= bands):
                raise ArgumentError(f"核维度 {self.core_dims} 超出 {(big_w, big_h, bands)}")
        return self

    @property
    def ratio(self) -> int:
        return self.msi_dims[0] // self.hsi_dims[0]

    @property
    def stages(self) -> int:
        """阶段数 s = log2(ratio)"""
        return int(round(math.log2(self.ratio)))

    @property
    def hsi_bands(self) -> int:
        return self.hsi_dims[2]

    @property
    def msi_bands(self) -> int:
        return self.msi_dims[2]

    @property
    def resolved_core_dims(self) -> Tuple[int, int, int]:
        """核维度 (n1, n2, n3)"""
        if self.core_dims is not None:
            return tuple(self.core_dims)
        big_w, big_h, _ = self.msi_dims
        n1 = max(1, min(big_w, int(round(self.core_ratio * big_w))))
        n2 = max(1, min(big_h, int(round(self.core_ratio * big_h))))
        n3 = min(self.spectral_core, self.hsi_bands)
        return n1, n2, n3

    @property
    def hidden_channels(self) -> int:
        """注意力全连接隐层宽度"""
        return max(1, self.n_s // self.reduction)

    @property
    def spectral_attention_on(self) -> bool:
        return self.use_ssam and self.use_spectral_attention

    @property
    def spatial_attention_on(self) -> bool:
        return self.use_ssam and self.use_spatial_attention

    @property
    def np_dtype(self) -> np.dtype:
        return np.dtype(self.dtype)
