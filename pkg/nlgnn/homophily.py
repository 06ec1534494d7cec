"""
同配率指标与数据集统计
"""

from typing import Optional

import numpy as np

from .errors import ConfigError, MetricError
from .graph_data import DatasetStats, Graph, Permutation


def node_fractions(g: Graph) -> np.ndarray:
    """每个节点的同类邻居占比；孤立节点为 NaN"""
    src, dst = g.edge_index
    same = (g.labels[src] == g.labels[dst]).astype(np.float64)
    same_count = np.bincount(src, weights=same, minlength=g.n)
    degrees = g.degrees
    fractions = np.full(g.n, np.nan)
    nonzero = degrees > 0
    fractions[nonzero] = same_count[nonzero] / degrees[nonzero]
    return fractions


def homophily(g: Graph) -> float:
    """
    H(G)：非孤立节点上同类邻居占比的均值

    返回:
        [0, 1] 内的实数
    """
    fractions = node_fractions(g)
    valid = ~np.isnan(fractions)
    if not valid.any():
        raise MetricError(f"{g.name}: 所有节点都是孤立节点，同配率无定义")
    return float(fractions[valid].mean())


def reconnected_homophily(g: Graph, perm: Permutation, s: int) -> float:
    """
    重连图的同配率 H(Ĝ)

    排序位置 i 上的节点与位置 i-s … i+s（两端截断，不含自身）相连。

    参数:
        perm: 注意力排序得到的排列
        s: 卷积感受野半宽
    """
    if s <= 0:
        raise ConfigError(f"感受野半宽 s 必须为正，当前为 {s}")
    n = g.n
    if n < 2:
        raise MetricError("节点数少于 2，重连图没有边")
    if len(perm) != n:
        raise ConfigError(f"排列长度 {len(perm)} 与节点数 {n} 不一致")
    seq = g.labels[perm.order]
    same = np.zeros(n)
    for offset in range(1, min(s, n - 1) + 1):
        match = (seq[:-offset] == seq[offset:]).astype(np.float64)
        same[:-offset] += match
        same[offset:] += match
    positions = np.arange(n)
    counts = np.minimum(positions, s) + np.minimum(n - 1 - positions, s)
    return float(np.mean(same / counts))


def label_run_length(labels_in_order: np.ndarray) -> float:
    """序列中相同标签最大连续段的平均长度"""
    labels_in_order = np.asarray(labels_in_order)
    if labels_in_order.size == 0:
        return 0.0
    breaks = np.count_nonzero(labels_in_order[1:] != labels_in_order[:-1])
    return labels_in_order.size / (breaks + 1)


def shuffle_run_length_median(labels: np.ndarray, shuffles: int = 100,
                              seed: Optional[int] = 0) -> float:
    """随机排列下 label_run_length 的中位数（聚集程度的对照）"""
    rng = np.random.default_rng(seed)
    values = [label_run_length(rng.permutation(labels)) for _ in range(shuffles)]
    return float(np.median(values))


def dataset_statistics(g: Graph) -> DatasetStats:
    """统计表的一行：节点数、边数、特征维数、类别数、H(G)"""
    return DatasetStats(
        name=g.name,
        nodes=g.n,
        edges=g.num_edges,
        features=g.num_features,
        classes=g.num_classes,
        homophily=homophily(g),
    )
