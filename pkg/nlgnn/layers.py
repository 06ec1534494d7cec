"""
局部嵌入阶段：两层 MLP / GCN / GAT 编码器

三种编码器都是 (图, 参数) 的纯函数，输出局部节点嵌入 z_v。
两层之间为 ReLU，第二层之后不加非线性。
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_array

from .config import GAT_HEADS, GAT_NEGATIVE_SLOPE
from .errors import ConfigError, ShapeError
from .functional import (
    concat_cols, dropout, edge_softmax, leaky_relu, matmul, relu, scale_rows,
    segment_sum, slice_cols, spmm, take_rows, add,
)
from .graph_data import Graph
from .tensor import Tensor, parameter

ENCODER_VARIANTS = ("MLP", "GCN", "GAT")


@dataclass
class EncoderParams:
    """
    编码器参数

    gat_attention[层][头] = (a_src, a_dst)：a_src 作用于邻居 u，a_dst 作用于中心节点 v
    """
    variant: str
    W1: Tensor
    W2: Tensor
    gat_attention: List[List[Tuple[Tensor, Tensor]]] = field(default_factory=list)
    dropout_rate: float = 0.0
    heads: int = 1

    def named_parameters(self) -> Dict[str, Tensor]:
        params = {"encoder.W1": self.W1, "encoder.W2": self.W2}
        for layer, heads in enumerate(self.gat_attention):
            for h, (a_src, a_dst) in enumerate(heads):
                params[f"encoder.gat{layer}.head{h}.a_src"] = a_src
                params[f"encoder.gat{layer}.head{h}.a_dst"] = a_dst
        return params


def glorot(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    """Glorot 均匀初始化"""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_encoder(variant: str, in_dim: int, hidden: int, out_dim: int, rng: np.random.Generator,
                 dropout_rate: float = 0.0, heads: int = GAT_HEADS) -> EncoderParams:
    """
    初始化编码器参数

    参数:
        variant: MLP / GCN / GAT
        in_dim, hidden, out_dim: d, h, f
        heads: GAT 第一层头数，每头宽度为 hidden / heads
    """
    variant = variant.upper()
    if variant not in ENCODER_VARIANTS:
        raise ConfigError(f"未知编码器: {variant}，可用: {list(ENCODER_VARIANTS)}")
    W1 = parameter(glorot(rng, (in_dim, hidden), in_dim, hidden), "encoder.W1")
    W2 = parameter(glorot(rng, (hidden, out_dim), hidden, out_dim), "encoder.W2")
    attention: List[List[Tuple[Tensor, Tensor]]] = []
    if variant == "GAT":
        if hidden % heads:
            raise ConfigError(f"hidden={hidden} 不能被头数 {heads} 整除")
        width = hidden // heads
        layer1 = [(parameter(glorot(rng, (width,), width, 1)), parameter(glorot(rng, (width,), width, 1)))
                  for _ in range(heads)]
        layer2 = [(parameter(glorot(rng, (out_dim,), out_dim, 1)),
                   parameter(glorot(rng, (out_dim,), out_dim, 1)))]
        attention = [layer1, layer2]
    else:
        heads = 1
    return EncoderParams(variant, W1, W2, attention, dropout_rate, heads)


def _check_input(features: Tensor, p: EncoderParams, variant: str) -> None:
    if p.variant != variant:
        raise ConfigError(f"参数属于 {p.variant} 编码器，不能用于 {variant}")
    if features.ndim != 2 or features.shape[1] != p.W1.shape[0]:
        raise ShapeError(f"特征形状 {features.shape} 与 W1 形状 {p.W1.shape} 不匹配")


# ==================== MLP ====================

def mlp_embed(features: Tensor, p: EncoderParams, training: bool = False,
              rng: Optional[np.random.Generator] = None) -> Tensor:
    """z = ReLU(x·W1)·W2，逐行独立，不使用邻居信息"""
    _check_input(features, p, "MLP")
    x = dropout(features, p.dropout_rate, rng=rng, training=training)
    h = relu(matmul(x, p.W1))
    h = dropout(h, p.dropout_rate, rng=rng, training=training)
    return matmul(h, p.W2)


# ==================== GCN ====================

def normalize_adjacency(g: Graph) -> np.ndarray:
    """
    Â = D̂^{-1/2}(A+I)D̂^{-1/2} 的边权

    返回:
        与 g.closed_edges 对齐的权重数组
    """
    src, dst = g.closed_edges
    deg = (g.degrees + 1).astype(np.float64)
    return 1.0 / np.sqrt(deg[src] * deg[dst])


def normalized_adjacency_matrix(g: Graph) -> csr_array:
    """Â 的稀疏矩阵形式，行为中心节点 v，列为邻居 u"""
    src, dst = g.closed_edges
    return csr_array((normalize_adjacency(g), (dst, src)), shape=(g.n, g.n))


def gcn_embed(g: Graph, features: Tensor, p: EncoderParams, training: bool = False,
              rng: Optional[np.random.Generator] = None,
              adjacency: Optional[csr_array] = None) -> Tensor:
    """
    两轮（归一化聚合 → 线性变换），中间 ReLU

    参数:
        adjacency: 预先计算的 Â（训练循环中复用）
    """
    _check_input(features, p, "GCN")
    a_hat = adjacency if adjacency is not None else normalized_adjacency_matrix(g)
    x = dropout(features, p.dropout_rate, rng=rng, training=training)
    h = relu(spmm(a_hat, matmul(x, p.W1)))
    h = dropout(h, p.dropout_rate, rng=rng, training=training)
    return spmm(a_hat, matmul(h, p.W2))


# ==================== GAT ====================

def _attention_head(h: Tensor, a_src: Tensor, a_dst: Tensor, src: np.ndarray, dst: np.ndarray,
                    n: int) -> Tuple[Tensor, Tensor]:
    """单头注意力：返回 (聚合结果, 边权 alpha)"""
    s_src = matmul(h, a_src)
    s_dst = matmul(h, a_dst)
    scores = leaky_relu(add(take_rows(s_src, src), take_rows(s_dst, dst)), GAT_NEGATIVE_SLOPE)
    alpha = edge_softmax(scores, dst, n)
    out = segment_sum(scale_rows(take_rows(h, src), alpha), dst, n)
    return out, alpha


def gat_attention_weights(g: Graph, h: Tensor, a_src: Tensor, a_dst: Tensor
                          ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    某一头在闭邻域上的注意力权重

    返回:
        (src, dst, alpha)：alpha[e] 是中心 dst[e] 对邻居 src[e] 的权重
    """
    src, dst = g.closed_edges
    _, alpha = _attention_head(h, a_src, a_dst, src, dst, g.n)
    return src, dst, alpha.data


def gat_embed(g: Graph, features: Tensor, p: EncoderParams, training: bool = False,
              rng: Optional[np.random.Generator] = None) -> Tensor:
    """两层注意力：第一层多头拼接，第二层单头"""
    _check_input(features, p, "GAT")
    src, dst = g.closed_edges
    width = p.W1.shape[1] // p.heads
    x = dropout(features, p.dropout_rate, rng=rng, training=training)
    h = matmul(x, p.W1)
    outputs = []
    for k, (a_src, a_dst) in enumerate(p.gat_attention[0]):
        head = slice_cols(h, k * width, (k + 1) * width) if p.heads > 1 else h
        out, _ = _attention_head(head, a_src, a_dst, src, dst, g.n)
        outputs.append(out)
    h = relu(concat_cols(*outputs) if len(outputs) > 1 else outputs[0])
    h = dropout(h, p.dropout_rate, rng=rng, training=training)
    h = matmul(h, p.W2)
    a_src, a_dst = p.gat_attention[1][0]
    out, _ = _attention_head(h, a_src, a_dst, src, dst, g.n)
    return out


def embed(g: Graph, features: Tensor, p: EncoderParams, training: bool = False,
          rng: Optional[np.random.Generator] = None, adjacency: Optional[csr_array] = None) -> Tensor:
    """按 p.variant 分派"""
    if p.variant == "MLP":
        return mlp_embed(features, p, training, rng)
    if p.variant == "GCN":
        return gcn_embed(g, features, p, training, rng, adjacency)
    return gat_embed(g, features, p, training, rng)
