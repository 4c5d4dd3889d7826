"""
训练配置模块
定义损失权重、损失消融开关与训练过程参数

包含：
1. 损失权重 LossWeights (α, β1, β2, γ)
2. 损失消融开关 AblationSwitches
3. 训练配置 TrainConfig
"""

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from autodiff.optim import LrSchedule
from manifold.graph import DEFAULT_K


class LossWeights(BaseModel):
    """
    联合损失权重

    属性说明：
    - alpha: PSF-SRF 损失权重
    - beta1: 光谱流形权重
    - beta2: 空间流形权重
    - gamma: LR-MSI 一致性项权重
    """
    alpha: float = Field(1e-1, ge=0, description="PSF-SRF 损失权重")
    beta1: float = Field(1e-3, ge=0, description="光谱流形权重")
    beta2: float = Field(1e-2, ge=0, description="空间流形权重")
    gamma: float = Field(1.0, ge=0, description="LR-MSI 一致性项权重")


class AblationSwitches(BaseModel):
    """
    损失消融开关，关闭的项在损失记录中为0
    """
    use_rec_loss: bool = Field(True, description="是否使用重构损失")
    use_psf_srf_loss: bool = Field(True, description="是否使用 PSF-SRF 损失")
    use_spectral_manifold: bool = Field(True, description="是否使用光谱流形约束")
    use_spatial_manifold: bool = Field(True, description="是否使用空间流形约束")
    loss_norm: Literal["l1", "l2"] = Field("l1", description="损失范数(l1 为平均绝对误差，l2 为均方误差)")


class TrainConfig(BaseModel):
    """
    训练配置

    属性说明：
    - epochs: 训练轮数
    - base_lr / decay_start_epoch: 学习率及线性衰减起点
    - seed: 参数初始化随机种子
    - weights / ablation: 损失权重与消融开关
    - knn_k / knn_sigma / graph_feature_stride: 流形图参数
    - freeze_degradation: 冻结 PSF/SRF 层
    - log_interval: 日志间隔(轮)
    - checkpoint_path: 检查点路径，为空时不保存
    - checkpoint_interval: 中途保存检查点的间隔(轮)，为空时只在结束时保存
    """
    epochs: int = Field(10000, gt=0, description="训练轮数")
    base_lr: float = Field(5e-3, gt=0, description="基础学习率")
    decay_start_epoch: int = Field(3000, ge=0, description="学习率开始线性衰减的轮数")
    seed: int = Field(0, ge=0, description="随机种子")
    weights: LossWeights = Field(default_factory=LossWeights, description="损失权重")
    ablation: AblationSwitches = Field(default_factory=AblationSwitches, description="损失消融开关")
    knn_k: int = Field(DEFAULT_K, ge=1, description="KNN 近邻数")
    knn_sigma: Union[float, Literal["auto"]] = Field("auto", description="KNN 核宽度或 auto")
    graph_feature_stride: int = Field(1, ge=1, description="构图特征抽样步长")
    freeze_degradation: bool = Field(False, description="是否冻结 PSF/SRF 层")
    log_interval: int = Field(100, ge=1, description="日志间隔(轮)")
    checkpoint_path: Optional[str] = Field(None, description="检查点路径")
    checkpoint_interval: Optional[int] = Field(None, ge=1, description="中途保存检查点间隔(轮)")

    @model_validator(mode="after")
    def _check_schedule(self) -> "TrainConfig":
        if self.decay_start_epoch > self.epochs:
            raise ValueError(f"decay_start_epoch {self.decay_start_epoch} 不能超过 epochs {self.epochs}")
        return self

    @property
    def schedule(self) -> LrSchedule:
        return LrSchedule(base_lr=self.base_lr, total_epochs=self.epochs,
                          decay_start_epoch=self.decay_start_epoch)
