"""
训练模块
主要功能：无监督联合训练 CTFN、共享解码器与 PSF/SRF 层

实现说明：
1. 训练前由输入构造冻结的光谱/空间流形图
2. 每轮：CTFN 前向 -> 三路解码 -> 联合损失 -> 反向传播 -> ADAM(学习率 lr_at(epoch))
3. 损失非有限时终止，并报告计算图中第一个非有限节点
4. 检查点包含参数、ADAM 状态、轮数、损失记录与当前核张量，可从中途恢复
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Optional, Tuple
import logging
import time

import numpy as np

from autodiff.checkpoint import load_checkpoint, save_checkpoint
from autodiff.engine import DiffArray
from autodiff.optim import AdamState, adam_step, lr_at
from manifold.graph import (
    LaplacianGraph,
    spatial_graphs_from_hr_msi,
    spatial_manifold_term,
    spectral_graph_from_lr_hsi,
    spectral_manifold_term,
)
from network.blocks import array_to_cube, cube_to_array
from network.config import CtfnConfig
from network.ctfn import core_from_inputs
from network.decoder import DecodeTarget, decode, extract_factors
from network.degradation_layers import DegradationLayers
from network.params import CtfnParams
from tensor.core import HyperCube, TuckerFactors
from tensor.exceptions import ArgumentError, FormatError, NumericalError
from training.config import TrainConfig
from training.losses import LossTerms, joint_loss, psf_srf_terms, rec_loss

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("epoch", "lr", "L_rec", "L_degraded", "L_LR-MSI", "L_spe", "L_spa", "L_total")


@dataclass
class ForwardResult:
    """单次前向的输出"""
    core: DiffArray
    x_hat: DiffArray
    y_hat: DiffArray
    z_hat: DiffArray
    terms: LossTerms
    total: DiffArray


@dataclass
class TrainResult:
    """
    训练结果

    属性说明：
    - params: 训练后的网络参数
    - fused: 融合得到的 HR-HSI
    - trace: 损失记录 (epochs x len(TRACE_COLUMNS))，float32
    - factors: 最终核张量与因子矩阵
    """
    params: CtfnParams
    fused: HyperCube
    trace: np.ndarray
    factors: TuckerFactors


class Trainer:
    """
    训练会话

    一个会话独占其计算图与参数，不同会话之间互不共享状态
    """

    def __init__(self, x: HyperCube, y: HyperCube, config: TrainConfig,
                 network_config: Optional[CtfnConfig] = None,
                 degradation: Optional[DegradationLayers] = None):
        """
        初始化训练会话

        参数:
            x: LR-HSI (w, h, S)
            y: HR-MSI (W, H, s)
            config: 训练配置
            network_config: 网络配置，为空时按输入维度使用默认值
            degradation: 固定退化层(非盲模式)，为空时使用可学习 PSF/SRF
        """
        self.config = config
        self.network_config = network_config or CtfnConfig(hsi_dims=x.dims, msi_dims=y.dims)
        if tuple(self.network_config.hsi_dims) != x.dims or tuple(self.network_config.msi_dims) != y.dims:
            raise ArgumentError(
                f"输入维度 {x.dims}/{y.dims} 与网络配置 "
                f"{self.network_config.hsi_dims}/{self.network_config.msi_dims} 不一致"
            )
        self.params = CtfnParams(self.network_config, seed=config.seed, degradation=degradation)
        if config.freeze_degradation:
            self.params.degradation.freeze()

        dtype = self.network_config.np_dtype
        self.x = cube_to_array(x, dtype)
        self.y = cube_to_array(y, dtype)
        self.schedule = config.schedule

        ablation = config.ablation
        self.graph_s: Optional[LaplacianGraph] = None
        self.graph_w: Optional[LaplacianGraph] = None
        self.graph_h: Optional[LaplacianGraph] = None
        if ablation.use_spectral_manifold:
            self.graph_s = spectral_graph_from_lr_hsi(x, config.knn_k, config.knn_sigma,
                                                      config.graph_feature_stride)
        if ablation.use_spatial_manifold:
            self.graph_w, self.graph_h = spatial_graphs_from_hr_msi(y, config.knn_k, config.knn_sigma,
                                                                    config.graph_feature_stride)

        self.adam = AdamState.for_params(self.params.named_parameters(), base_lr=config.base_lr)
        self.epoch = 0
        self._trace = []

    @property
    def trace(self) -> np.ndarray:
        if not self._trace:
            return np.zeros((0, len(TRACE_COLUMNS)), dtype=np.float32)
        return np.asarray(self._trace, dtype=np.float32)

    def forward(self) -> ForwardResult:
        """按当前参数计算核张量、三路重构与联合损失"""
        params, config = self.params, self.config
        ablation, weights = config.ablation, config.weights
        norm = ablation.loss_norm

        core, _ = core_from_inputs(self.x, self.y, params)
        x_hat = decode(core, DecodeTarget.LR_HSI, params)
        y_hat = decode(core, DecodeTarget.HR_MSI, params)
        z_hat = decode(core, DecodeTarget.HR_HSI, params)

        terms = LossTerms()
        if ablation.use_rec_loss:
            terms.rec = rec_loss(self.x, x_hat, self.y, y_hat, norm)
        if ablation.use_psf_srf_loss:
            terms.degraded, terms.lr_msi = psf_srf_terms(self.x, self.y, z_hat, params.degradation, norm)
        if ablation.use_spectral_manifold:
            terms.spectral = spectral_manifold_term(params.s_matrix(), self.graph_s, weights.beta1)
        if ablation.use_spatial_manifold:
            terms.spatial = spatial_manifold_term(params.w_factor, params.h_factor,
                                                  self.graph_w, self.graph_h, weights.beta2)
        total = joint_loss(terms, weights, ablation)
        return ForwardResult(core=core, x_hat=x_hat, y_hat=y_hat, z_hat=z_hat, terms=terms, total=total)

    def step(self) -> np.ndarray:
        """
        执行一轮训练

        返回:
            本轮的损失记录行

        异常:
            NumericalError: 损失非有限
        """
        lr = lr_at(self.schedule, self.epoch)
        self.params.zero_grad()
        result = self.forward()
        if not np.isfinite(result.total.value):
            culprit = result.total.first_non_finite()
            label = "未知" if culprit is None else (culprit.name or culprit.op)
            logger.error(f"第 {self.epoch} 轮损失非有限，首个非有限节点: {label}")
            raise NumericalError(f"第 {self.epoch} 轮损失非有限，首个非有限节点: {label}")

        result.total.backward()
        named = self.params.named_parameters()
        grads = {name: p.grad for name, p in named.items() if p.grad is not None}
        adam_step(named, grads, self.adam, lr)

        row = np.asarray((self.epoch, lr) + result.terms.values() + (result.total.item(),),
                         dtype=np.float32)
        self._trace.append(row)
        self.epoch += 1
        return row

    def fit(self) -> TrainResult:
        """从当前轮数训练到 config.epochs"""
        config = self.config
        start = time.time()
        logger.info(f"开始训练: 第 {self.epoch} 轮 -> 第 {config.epochs} 轮, 种子 {config.seed}")
        while self.epoch < config.epochs:
            row = self.step()
            done = self.epoch
            if done == 1 or done % config.log_interval == 0 or done == config.epochs:
                logger.info(
                    f"第 {done} 轮: lr={row[1]:.3e}, L_rec={row[2]:.5f}, L_degraded={row[3]:.5f}, "
                    f"L_LR-MSI={row[4]:.5f}, L_spe={row[5]:.5f}, L_spa={row[6]:.5f}, L_total={row[7]:.5f}"
                )
            if config.checkpoint_path and config.checkpoint_interval and done % config.checkpoint_interval == 0:
                self.save(config.checkpoint_path)
        logger.info(f"训练完成, 耗时 {time.time() - start:.1f}秒")
        if config.checkpoint_path:
            self.save(config.checkpoint_path)
        return self.result()

    def predict(self) -> Tuple[HyperCube, TuckerFactors]:
        """以当前参数计算融合结果与 Tucker 因子"""
        core, _ = core_from_inputs(self.x, self.y, self.params)
        fused = array_to_cube(decode(core, DecodeTarget.HR_HSI, self.params))
        return fused, extract_factors(core, self.params)

    def result(self) -> TrainResult:
        fused, factors = self.predict()
        return TrainResult(params=self.params, fused=fused, trace=self.trace, factors=factors)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """检查点内容(有序)"""
        arrays: Dict[str, np.ndarray] = OrderedDict()
        arrays["epoch"] = np.asarray(self.epoch)
        arrays["adam.t"] = np.asarray(self.adam.t)
        for name, value in self.params.state_arrays().items():
            arrays[f"param/{name}"] = value
        for name in self.params.named_parameters():
            arrays[f"adam.m/{name}"] = self.adam.m[name]
            arrays[f"adam.v/{name}"] = self.adam.v[name]
        arrays["trace"] = self.trace
        core, pyramid = core_from_inputs(self.x, self.y, self.params)
        arrays["core"] = extract_factors(core, self.params).core.data
        for j, f in enumerate(pyramid.f_up, start=1):
            arrays[f"feature/f_up.{j}"] = f.value[0]
        for key, matrix in zip(("p1", "p2", "p3"), self.params.degradation.operators()):
            arrays[f"operator/{key}"] = matrix
        return arrays

    def save(self, path: str):
        save_checkpoint(path, self.state_arrays())

    def restore(self, path: str):
        """
        从检查点恢复训练状态(同一配置与输入)

        异常:
            FormatError: 检查点与当前网络不一致
        """
        arrays = load_checkpoint(path)
        try:
            self.params.load_state_arrays(
                {k[len("param/"):]: v for k, v in arrays.items() if k.startswith("param/")}
            )
            self.epoch = int(arrays["epoch"].item())
            self.adam.t = int(arrays["adam.t"].item())
            for name, p in self.params.named_parameters().items():
                self.adam.m[name] = arrays[f"adam.m/{name}"].astype(p.dtype)
                self.adam.v[name] = arrays[f"adam.v/{name}"].astype(p.dtype)
            trace = arrays["trace"]
        except KeyError as e:
            raise FormatError(f"检查点缺少条目: {str(e)}", path=path)
        except FormatError as e:
            raise FormatError(str(e), path=path)
        if self.epoch > self.config.epochs or trace.shape != (self.epoch, len(TRACE_COLUMNS)):
            raise FormatError(f"检查点轮数 {self.epoch} 与损失记录 {trace.shape} 不一致", path=path)
        self._trace = [row.astype(np.float32) for row in trace]
        logger.info(f"已从检查点恢复: {path}, 第 {self.epoch} 轮")


def train(x: HyperCube, y: HyperCube, config: TrainConfig,
          network_config: Optional[CtfnConfig] = None,
          degradation: Optional[DegradationLayers] = None,
          resume_from: Optional[str] = None) -> TrainResult:
    """
    无监督融合训练

    参数:
        x: LR-HSI
        y: HR-MSI
        config: 训练配置
        network_config: 网络配置
        degradation: 固定退化层(非盲模式)
        resume_from: 检查点路径，给出时从中途恢复

    返回:
        TrainResult
    """
    trainer = Trainer(x, y, config, network_config, degradation)
    if resume_from:
        trainer.restore(resume_from)
    return trainer.fit()
