"""
非局部聚合

流程: 注意力分数 a_v = cᵀz_v → 按分数非递减排序 → 序列第 i 行为 a_i·z_i →
两层一维卷积（中间 ReLU）→ 按逆排列散射回原节点顺序 → [ẑ ‖ z] 线性分类。

排序本身不可导：每次前向按当前分数重新排序，反向时排列视为常量，
梯度经由分数因子 a_i 流向 z 与校准向量 c。
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .config import debug_enabled
from .errors import ConfigError, ContractError, ShapeError
from .functional import (
    add, concat_cols, conv1d, matmul, relu, scale_rows, softmax_rows, take_rows, transpose,
)
from .graph_data import Permutation
from .tensor import Tensor, parameter

logger = logging.getLogger(__name__)


@dataclass
class NonLocalParams:
    """
    非局部聚合与分类头参数

    conv2 为 None 时只做单层卷积（不加 ReLU）
    """
    c: Tensor
    conv1: Tensor
    b1: Tensor
    conv2: Optional[Tensor]
    b2: Optional[Tensor]
    classifier_W: Tensor
    classifier_b: Tensor

    @property
    def kernel_size(self) -> int:
        return self.conv1.shape[0]

    def named_parameters(self) -> Dict[str, Tensor]:
        params = {"nonlocal.c": self.c, "nonlocal.conv1": self.conv1, "nonlocal.b1": self.b1}
        if self.conv2 is not None:
            params["nonlocal.conv2"] = self.conv2
            params["nonlocal.b2"] = self.b2
        params["classifier.W"] = self.classifier_W
        params["classifier.b"] = self.classifier_b
        return params


def init_nonlocal(f: int, num_classes: int, kernel_size: int, rng: np.random.Generator) -> NonLocalParams:
    """
    随机初始化

    c ~ N(0, 1/f)；卷积核按 fan_in = k·f 均匀初始化；偏置为 0
    """
    if kernel_size % 2 == 0 or kernel_size < 1:
        raise ConfigError(f"卷积核大小必须为正奇数，当前为 {kernel_size}")
    bound = 1.0 / np.sqrt(kernel_size * f)
    limit = np.sqrt(6.0 / (3 * f + num_classes))
    return NonLocalParams(
        c=parameter(rng.normal(0.0, np.sqrt(1.0 / f), size=f), "nonlocal.c"),
        conv1=parameter(rng.uniform(-bound, bound, size=(kernel_size, f, f)), "nonlocal.conv1"),
        b1=parameter(np.zeros(f), "nonlocal.b1"),
        conv2=parameter(rng.uniform(-bound, bound, size=(kernel_size, f, f)), "nonlocal.conv2"),
        b2=parameter(np.zeros(f), "nonlocal.b2"),
        classifier_W=parameter(rng.uniform(-limit, limit, size=(2 * f, num_classes)), "classifier.W"),
        classifier_b=parameter(np.zeros(num_classes), "classifier.b"),
    )


# ==================== 注意力排序 ====================

def attention_scores(z: Tensor, c: Tensor) -> Tensor:
    """score_v = cᵀz_v，对 z 与 c 均可导"""
    if c.ndim != 1:
        raise ShapeError(f"校准向量需要一维，当前形状 {c.shape}")
    return matmul(z, c)


def sort_permutation(scores: Tensor) -> Permutation:
    """
    按分数非递减排序，分数相同时按节点编号升序（稳定排序）

    返回:
        Permutation；order[i] 为第 i 个排序位置上的节点
    """
    values = scores.data if isinstance(scores, Tensor) else np.asarray(scores, dtype=np.float64)
    if values.ndim != 1:
        raise ShapeError(f"分数需要一维，当前形状 {values.shape}")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ContractError(f"节点 {int(bad[0])} 的注意力分数非有限值: {values[bad[0]]}")
    order = np.argsort(values, kind="stable")
    return Permutation.from_order(order)


def _assert_sorted(values: np.ndarray, perm: Permutation) -> None:
    ordered = values[perm.order]
    if ordered.size > 1 and np.any(ordered[1:] < ordered[:-1]):
        pos = int(np.flatnonzero(ordered[1:] < ordered[:-1])[0])
        raise ContractError(f"排序后的分数在位置 {pos} 处递减")


def nonlocal_aggregate(z: Tensor, scores: Tensor, perm: Permutation, p: NonLocalParams) -> Tensor:
    """
    非局部聚合 ẑ

    参数:
        z: [n×f] 局部嵌入
        scores: [n] 注意力分数
        perm: 由 scores 得到的排列（反向时视为常量）

    返回:
        [n×f]，按原节点顺序排列
    """
    n = z.shape[0]
    if len(perm) != n or scores.shape != (n,):
        raise ContractError(f"排列长度 {len(perm)}、分数形状 {scores.shape} 与节点数 {n} 不一致")
    if debug_enabled():
        _assert_sorted(scores.data, perm)

    weighted = scale_rows(z, scores)
    seq = take_rows(weighted, perm.order, bijective=True)
    out = conv1d(seq, p.conv1, p.b1)
    if p.conv2 is not None:
        out = conv1d(relu(out), p.conv2, p.b2)
    return take_rows(out, perm.inverse, bijective=True)


def predict(z: Tensor, z_hat: Tensor, p: NonLocalParams) -> Tensor:
    """logits = [ẑ ‖ z]·W + b"""
    if z.shape != z_hat.shape:
        raise ShapeError(f"predict 维度不匹配: ẑ {z_hat.shape} 与 z {z.shape}")
    return add(matmul(concat_cols(z_hat, z), p.classifier_W), p.classifier_b)


# ==================== 全注意力基线 ====================

def full_attention_baseline(z: Tensor) -> Tensor:
    """
    稠密 O(n²) 注意力: o_v = Σ_u softmax_u(z_v·z_u) z_u

    作为复杂度对照，也是稠密非局部聚合语义的参照
    """
    if z.ndim != 2 or z.shape[0] < 1:
        raise ShapeError(f"全注意力需要非空 [n×f]，当前形状 {z.shape}")
    weights = softmax_rows(matmul(z, transpose(z)))
    return matmul(weights, z)
