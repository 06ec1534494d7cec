"""
端到端模型：局部编码器 + （可选）非局部聚合 + 分类头

普通变体（MLP/GCN/GAT）编码器输出宽度为类别数，嵌入即 logits；
NL 变体的编码器输出宽度 f = hidden，再经排序、卷积与线性分类。
"""

import json
import logging
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from scipy.sparse import csr_array

from .config import GAT_HEADS, NONLOCAL_VARIANTS, VARIANTS, TrainConfig
from .errors import ConfigError, ContractError, IngestionError
from .graph_data import Graph, Permutation
from .layers import EncoderParams, embed, init_encoder
from .nonlocal_agg import (
    NonLocalParams, attention_scores, init_nonlocal, nonlocal_aggregate, predict, sort_permutation,
)
from .tensor import Tensor

logger = logging.getLogger(__name__)

CONFIG_KEY = "__config__"


@dataclass(frozen=True)
class ModelConfig:
    """模型结构（不含优化相关超参数）"""
    variant: str
    in_dim: int
    hidden: int
    num_classes: int
    dropout: float = 0.0
    kernel_size: int = 3
    heads: int = GAT_HEADS

    @property
    def is_nonlocal(self) -> bool:
        return self.variant in NONLOCAL_VARIANTS

    @property
    def encoder_variant(self) -> str:
        return self.variant[2:] if self.is_nonlocal else self.variant

    @property
    def embed_dim(self) -> int:
        return self.hidden if self.is_nonlocal else self.num_classes

    @classmethod
    def from_train_config(cls, cfg: TrainConfig, in_dim: int, num_classes: int,
                          heads: int = GAT_HEADS) -> "ModelConfig":
        return cls(cfg.variant, in_dim, cfg.hidden, num_classes, cfg.dropout, cfg.kernel_size, heads)


@dataclass
class ModelParams:
    config: ModelConfig
    encoder: EncoderParams
    nonlocal_: Optional[NonLocalParams] = None

    def named_parameters(self) -> Dict[str, Tensor]:
        params = dict(self.encoder.named_parameters())
        if self.nonlocal_ is not None:
            params.update(self.nonlocal_.named_parameters())
        return params


@dataclass
class ForwardOutput:
    """一次前向的结果；非 NL 变体的 scores / perm 为 None"""
    logits: Tensor
    z: Tensor
    scores: Optional[Tensor] = None
    perm: Optional[Permutation] = None


def init_model(cfg: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """按结构随机初始化全部参数"""
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"未知模型: {cfg.variant}，可用: {list(VARIANTS)}")
    heads = cfg.heads if cfg.encoder_variant == "GAT" else 1
    encoder = init_encoder(cfg.encoder_variant, cfg.in_dim, cfg.hidden, cfg.embed_dim, rng,
                           cfg.dropout, heads)
    nonlocal_ = init_nonlocal(cfg.hidden, cfg.num_classes, cfg.kernel_size, rng) if cfg.is_nonlocal else None
    return ModelParams(cfg, encoder, nonlocal_)


def forward(params: ModelParams, g: Graph, training: bool = False,
            rng: Optional[np.random.Generator] = None, perm: Optional[Permutation] = None,
            adjacency: Optional[csr_array] = None, features: Optional[Tensor] = None) -> ForwardOutput:
    """
    前向计算

    参数:
        training: 是否启用 dropout
        rng: dropout 随机源
        perm: 固定的排列（梯度检查用）；缺省时按当前分数重新排序
        adjacency / features: 训练循环中可复用的 Â 与特征张量
    """
    x = features if features is not None else g.feature_tensor()
    z = embed(g, x, params.encoder, training, rng, adjacency)
    if params.nonlocal_ is None:
        return ForwardOutput(logits=z, z=z)
    scores = attention_scores(z, params.nonlocal_.c)
    if perm is None:
        perm = sort_permutation(scores)
    z_hat = nonlocal_aggregate(z, scores, perm, params.nonlocal_)
    return ForwardOutput(predict(z, z_hat, params.nonlocal_), z, scores, perm)


# ==================== 参数保存与读取 ====================

def save_params(params: ModelParams, path: Union[str, Path]) -> Path:
    """保存为 .npz，结构配置以 JSON 字符串一并写入"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {name: t.data for name, t in params.named_parameters().items()}
    arrays[CONFIG_KEY] = np.array(json.dumps(asdict(params.config), sort_keys=True))
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    logger.info("参数已保存到 %s", path)
    return path


def load_params(path: Union[str, Path]) -> ModelParams:
    """读取 save_params 写出的参数文件"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"参数文件不存在: {path}")
    with np.load(path, allow_pickle=False) as data:
        if CONFIG_KEY not in data.files:
            raise IngestionError("参数文件缺少结构配置", str(path))
        cfg = ModelConfig(**json.loads(str(data[CONFIG_KEY])))
        stored = {name: data[name] for name in data.files if name != CONFIG_KEY}

    # 先按结构建出参数，再逐个覆盖数值
    params = init_model(cfg, np.random.default_rng(0))
    named = params.named_parameters()
    missing = sorted(set(named) - set(stored))
    if missing:
        raise ContractError(f"参数文件缺少参数: {missing}")
    for name, tensor in named.items():
        if stored[name].shape != tensor.shape:
            raise ContractError(f"参数 {name} 形状 {stored[name].shape} 与结构 {tensor.shape} 不一致")
        tensor.data = np.array(stored[name], dtype=np.float64)
    return params
