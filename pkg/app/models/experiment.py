"""
实验相关数据模型
定义命令行子命令共用的实验配置与运行清单

包含：
1. 实验配置模型 ExperimentConfig(key = value 配置文件的结构)
2. 运行清单模型 RunManifest(配置回显、种子与依赖版本)
"""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from degradation.models import NoiseSpec
from network.config import CtfnConfig
from training.config import AblationSwitches, LossWeights, TrainConfig

# 以配置文件所在目录为基准解析的路径字段
PATH_KEYS = ("reference", "lr_hsi", "hr_msi", "fused", "operators", "resume", "output_dir")
SRF_PRESETS = ("uniform", "landsat8", "file")


class ExperimentConfig(BaseModel):
    """
    实验配置模型

    属性说明：
    - reference / lr_hsi / hr_msi / fused / operators / resume: 输入输出文件路径
    - output_dir: 输出目录
    - ratio / blur_sigma / srf / wavelength_*: 退化仿真参数
    - noise_std / noise_seed: 仿真噪声
    - core_n1..3 / core_ratio / spectral_core / n_s / reduction: 网络结构
    - knn_k / knn_sigma / graph_feature_stride: 流形图
    - alpha / beta1 / beta2 / gamma: 损失权重
    - epochs / base_lr / decay_start_epoch / seed: 训练过程
    - use_*, loss_norm: 消融开关
    """
    model_config = ConfigDict(extra="forbid")

    # 文件路径
    reference: Optional[str] = Field(None, description="参考 HR-HSI 立方体文件")
    lr_hsi: Optional[str] = Field(None, description="LR-HSI 立方体文件")
    hr_msi: Optional[str] = Field(None, description="HR-MSI 立方体文件")
    fused: Optional[str] = Field(None, description="融合结果立方体文件(evaluate 使用)")
    operators: Optional[str] = Field(None, description="退化算子文件，给出时 fuse 进入非盲模式")
    resume: Optional[str] = Field(None, description="从该检查点恢复训练")
    output_dir: str = Field("output", description="输出目录")

    # 退化仿真
    ratio: int = Field(4, ge=2, description="空间下采样倍率")
    blur_sigma: Optional[float] = Field(None, gt=0, description="高斯模糊标准差，为空时取 0.5*ratio")
    srf: str = Field("uniform:4", description="光谱响应来源: uniform:N | landsat8 | file:<csv>")
    wavelength_min: float = Field(400.0, description="最短中心波长(nm)")
    wavelength_max: float = Field(1000.0, description="最长中心波长(nm)")
    noise_std: float = Field(0.0, ge=0, description="仿真噪声标准差")
    noise_seed: int = Field(0, ge=0, description="仿真噪声种子")

    # 网络结构
    core_n1: Optional[int] = Field(None, ge=1, description="核张量宽度维")
    core_n2: Optional[int] = Field(None, ge=1, description="核张量高度维")
    core_n3: Optional[int] = Field(None, ge=1, description="核张量光谱维")
    core_ratio: float = Field(0.85, gt=0, le=1, description="空间核维度压缩比")
    spectral_core: int = Field(40, ge=1, description="光谱核维度默认上限")
    n_s: int = Field(64, ge=1, description="特征通道数")
    reduction: int = Field(4, ge=1, description="注意力压缩比")
    dtype: Literal["float32", "float64"] = Field("float32", description="训练浮点类型")

    # 流形图
    knn_k: int = Field(8, ge=1, description="KNN 近邻数")
    knn_sigma: Union[float, Literal["auto"]] = Field("auto", description="KNN 核宽度或 auto")
    graph_feature_stride: int = Field(1, ge=1, description="构图特征抽样步长")

    # 损失权重
    alpha: float = Field(1e-1, ge=0, description="PSF-SRF 损失权重")
    beta1: float = Field(1e-3, ge=0, description="光谱流形权重")
    beta2: float = Field(1e-2, ge=0, description="空间流形权重")
    gamma: float = Field(1.0, ge=0, description="LR-MSI 一致性项权重")

    # 训练过程
    epochs: int = Field(10000, gt=0, description="训练轮数")
    base_lr: float = Field(5e-3, gt=0, description="基础学习率")
    decay_start_epoch: int = Field(3000, ge=0, description="学习率开始线性衰减的轮数")
    seed: int = Field(0, ge=0, description="随机种子")
    log_interval: int = Field(100, ge=1, description="日志间隔(轮)")
    checkpoint_interval: Optional[int] = Field(None, ge=1, description="中途保存检查点间隔(轮)")
    freeze_degradation: bool = Field(False, description="是否冻结 PSF/SRF 层")

    # 消融开关
    use_ctfn: bool = Field(True, description="是否使用完整CTFN")
    use_ssam: bool = Field(True, description="是否使用空谱注意力模块")
    use_spectral_attention: bool = Field(True, description="是否使用光谱注意力")
    use_spatial_attention: bool = Field(True, description="是否使用空间注意力")
    use_rec_loss: bool = Field(True, description="是否使用重构损失")
    use_psf_srf_loss: bool = Field(True, description="是否使用 PSF-SRF 损失")
    use_spectral_manifold: bool = Field(True, description="是否使用光谱流形约束")
    use_spatial_manifold: bool = Field(True, description="是否使用空间流形约束")
    loss_norm: Literal["l1", "l2"] = Field("l1", description="损失范数")

    @field_validator("srf")
    @classmethod
    def _check_srf(cls, value: str) -> str:
        kind, _, arg = value.partition(":")
        if kind not in SRF_PRESETS:
            raise ValueError(f"未知的光谱响应来源 '{value}'，可选: uniform:N, landsat8, file:<csv>")
        if kind == "uniform" and not arg.isdigit():
            raise ValueError(f"uniform 需要正整数波段数，实际为: '{arg}'")
        if kind == "file" and not arg:
            raise ValueError("file 需要给出CSV路径")
        return value

    @model_validator(mode="after")
    def _check_core_dims(self) -> "ExperimentConfig":
        given = [d is not None for d in (self.core_n1, self.core_n2, self.core_n3)]
        if any(given) and not all(given):
            raise ValueError("core_n1、core_n2、core_n3 必须同时给出或同时省略")
        if self.decay_start_epoch > self.epochs:
            raise ValueError(f"decay_start_epoch {self.decay_start_epoch} 不能超过 epochs {self.epochs}")
        return self

    @property
    def core_dims(self) -> Optional[Tuple[int, int, int]]:
        if self.core_n1 is None:
            return None
        return self.core_n1, self.core_n2, self.core_n3

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(enabled=self.noise_std > 0, std=self.noise_std, seed=self.noise_seed)

    def network_config(self, hsi_dims: Tuple[int, int, int],
                       msi_dims: Tuple[int, int, int]) -> CtfnConfig:
        """按输入维度构造网络配置"""
        return CtfnConfig(
            hsi_dims=hsi_dims,
            msi_dims=msi_dims,
            n_s=self.n_s,
            core_ratio=self.core_ratio,
            core_dims=self.core_dims,
            spectral_core=self.spectral_core,
            reduction=self.reduction,
            use_ctfn=self.use_ctfn,
            use_ssam=self.use_ssam,
            use_spectral_attention=self.use_spectral_attention,
            use_spatial_attention=self.use_spatial_attention,
            dtype=self.dtype,
        )

    def train_config(self, checkpoint_path: Optional[str] = None) -> TrainConfig:
        """构造训练配置"""
        return TrainConfig(
            epochs=self.epochs,
            base_lr=self.base_lr,
            decay_start_epoch=self.decay_start_epoch,
            seed=self.seed,
            weights=LossWeights(alpha=self.alpha, beta1=self.beta1, beta2=self.beta2, gamma=self.gamma),
            ablation=AblationSwitches(
                use_rec_loss=self.use_rec_loss,
                use_psf_srf_loss=self.use_psf_srf_loss,
                use_spectral_manifold=self.use_spectral_manifold,
                use_spatial_manifold=self.use_spatial_manifold,
                loss_norm=self.loss_norm,
            ),
            knn_k=self.knn_k,
            knn_sigma=self.knn_sigma,
            graph_feature_stride=self.graph_feature_stride,
            freeze_degradation=self.freeze_degradation or self.operators is not None,
            log_interval=self.log_interval,
            checkpoint_path=checkpoint_path,
            checkpoint_interval=self.checkpoint_interval,
        )


class RunManifest(BaseModel):
    """
    运行清单模型

    属性说明：
    - command: 子命令名称
    - config: 实验配置回显
    - seed: 随机种子
    - versions: Python 与数值依赖版本
    - outputs: 本次运行写出的文件
    """
    command: str = Field(..., description="子命令名称")
    config: Dict[str, Any] = Field(default_factory=dict, description="实验配置回显")
    seed: int = Field(0, description="随机种子")
    versions: Dict[str, str] = Field(default_factory=dict, description="依赖版本")
    outputs: List[str] = Field(default_factory=list, description="输出文件")
    created_at: datetime = Field(default_factory=datetime.now, description="创建时间")
