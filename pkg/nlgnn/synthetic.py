"""
合成图生成

两参数随机块模型：类内连边概率 p_in、类间 p_out。
给定平均度 D 与目标同配率 h，期望每个节点有 h·D 个同类邻居、(1-h)·D 个异类邻居：
    p_in  = h·D / (n/C - 1)
    p_out = (1-h)·D / (n - n/C)
特征为按类分块的 one-hot 原型，每一位以 feature_noise 的概率翻转。
"""

import logging
from typing import Callable, List

import numpy as np

from .errors import GenerationError
from .graph_data import Graph

logger = logging.getLogger(__name__)


def _distinct_keys(rng: np.random.Generator, m: int, draw: Callable[[int], np.ndarray]) -> np.ndarray:
    """
    不放回地收集 m 个互不相同的边编码

    参数:
        draw: 给定数量返回一批候选编码（可能重复、可能含无效值 -1）
    """
    taken = np.empty(0, dtype=np.int64)
    while taken.shape[0] < m:
        need = m - taken.shape[0]
        batch = draw(2 * need + 16)
        batch = batch[(batch >= 0) & ~np.isin(batch, taken)]
        # 保留批内首次出现的顺序，结果只依赖种子
        _, first = np.unique(batch, return_index=True)
        taken = np.concatenate([taken, batch[np.sort(first)][:need]])
    return taken


def _sample_within(rng: np.random.Generator, members: List[np.ndarray], p_in: float) -> np.ndarray:
    chunks = []
    for nodes in members:
        size = nodes.shape[0]
        pairs = size * (size - 1) // 2
        if pairs == 0 or p_in == 0.0:
            continue
        m = rng.binomial(pairs, p_in)

        def draw(k: int) -> np.ndarray:
            a = rng.integers(0, size, k)
            b = (a + rng.integers(1, size, k)) % size
            return np.minimum(a, b) * size + np.maximum(a, b)

        keys = _distinct_keys(rng, m, draw)
        chunks.append(np.stack([nodes[keys // size], nodes[keys % size]], axis=1))
    return np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)


def _sample_between(rng: np.random.Generator, labels: np.ndarray, p_out: float) -> np.ndarray:
    n = labels.shape[0]
    counts = np.bincount(labels)
    pairs = (n * n - int((counts ** 2).sum())) // 2
    if pairs == 0 or p_out == 0.0:
        return np.empty((0, 2), dtype=np.int64)
    m = rng.binomial(pairs, p_out)

    def draw(k: int) -> np.ndarray:
        u = rng.integers(0, n, k)
        v = rng.integers(0, n, k)
        keys = np.minimum(u, v) * n + np.maximum(u, v)
        return np.where(labels[u] != labels[v], keys, -1)

    keys = _distinct_keys(rng, m, draw)
    return np.stack([keys // n, keys % n], axis=1)


def generate_synthetic(n: int, num_classes: int, target_h: float, d: int, mean_degree: float,
                       feature_noise: float, seed: int = 0, name: str = "synthetic") -> Graph:
    """
    生成同配率可控的合成图

    参数:
        n: 节点数，需 >= 10·C
        num_classes: 类别数 C
        target_h: 目标同配率 [0, 1]
        d: 特征维数，需 >= C
        mean_degree: 期望平均度
        feature_noise: 特征位翻转概率 [0, 1]
        seed: 随机种子

    返回:
        Graph；n >= 1000 时实测同配率与 target_h 相差不超过约 0.05
    """
    C = num_classes
    if C < 2:
        raise GenerationError(f"类别数至少为 2，当前为 {C}")
    if n < 10 * C:
        raise GenerationError(f"节点数 {n} 少于 10·C = {10 * C}")
    if not 0.0 <= target_h <= 1.0:
        raise GenerationError(f"target_h 必须在 [0, 1] 内，当前为 {target_h}")
    if not 0.0 <= feature_noise <= 1.0:
        raise GenerationError(f"feature_noise 必须在 [0, 1] 内，当前为 {feature_noise}")
    if d < C:
        raise GenerationError(f"特征维数 {d} 小于类别数 {C}")
    if mean_degree <= 0:
        raise GenerationError(f"平均度必须为正，当前为 {mean_degree}")

    class_size = n / C
    p_in = target_h * mean_degree / (class_size - 1)
    p_out = (1.0 - target_h) * mean_degree / (n - class_size)
    if p_in > 1.0 or p_out > 1.0:
        raise GenerationError(
            f"不可行的组合 target_h={target_h}, mean_degree={mean_degree}: "
            f"p_in={p_in:.3f}, p_out={p_out:.3f}")

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % C)
    members = [np.flatnonzero(labels == c) for c in range(C)]
    edges = np.concatenate([_sample_within(rng, members, p_in), _sample_between(rng, labels, p_out)])

    # 按类分块的 one-hot 原型
    blocks = np.array_split(np.arange(d), C)
    prototypes = np.zeros((C, d))
    for c, cols in enumerate(blocks):
        prototypes[c, cols] = 1.0
    features = prototypes[labels]
    flips = rng.random(features.shape) < feature_noise
    features = np.where(flips, 1.0 - features, features)

    graph = Graph.from_edges(n, edges, features, labels, C, name)
    logger.info("生成合成图 %s: p_in=%.4g, p_out=%.4g, 边数=%d", name, p_in, p_out, graph.num_edges)
    return graph
