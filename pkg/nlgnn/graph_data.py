"""
图数据结构定义：Graph、Split、Permutation
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_array, csr_array

from .errors import ContractError, IngestionError, ShapeError
from .tensor import Tensor


@dataclass(frozen=True)
class Graph:
    """
    不可变的带属性无向图

    邻接以 CSR 对称存储（每条无向边存两次），不含自环。
    """
    n: int
    csr_offsets: np.ndarray
    csr_targets: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str = "graph"

    def __post_init__(self):
        offsets, targets = self.csr_offsets, self.csr_targets
        if offsets.shape != (self.n + 1,) or offsets[0] != 0 or offsets[-1] != targets.shape[0]:
            raise ContractError("CSR 偏移数组不合法")
        if np.any(np.diff(offsets) < 0):
            raise ContractError("CSR 偏移数组必须非递减")
        if self.features.ndim != 2 or self.features.shape[0] != self.n:
            raise ShapeError(f"特征矩阵形状 {self.features.shape} 与节点数 {self.n} 不一致")
        if self.labels.shape != (self.n,):
            raise ShapeError(f"标签长度 {self.labels.shape} 与节点数 {self.n} 不一致")
        if self.n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ContractError(f"标签必须位于 [0, {self.num_classes})")
        for arr in (offsets, targets, self.features, self.labels):
            arr.flags.writeable = False

    # ==================== 构造 ====================

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray, features: np.ndarray, labels: np.ndarray,
                   num_classes: Optional[int] = None, name: str = "graph") -> "Graph":
        """
        从边列表构造图：对称化、去重、去自环

        参数:
            n: 节点数
            edges: [m×2] 整数数组，节点编号 0..n-1
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise IngestionError(f"边中的节点编号超出范围 [0, {n})")
        labels = np.array(labels, dtype=np.int64).reshape(-1)
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if labels.size else 0
        keep = edges[:, 0] != edges[:, 1]
        src = np.concatenate([edges[keep, 0], edges[keep, 1]])
        dst = np.concatenate([edges[keep, 1], edges[keep, 0]])
        adj = coo_array((np.ones(src.shape[0]), (src, dst)), shape=(n, n)).tocsr()
        adj.sum_duplicates()
        adj.sort_indices()
        return cls(
            n=n,
            csr_offsets=adj.indptr.astype(np.int64),
            csr_targets=adj.indices.astype(np.int64),
            features=np.array(features, dtype=np.float64).reshape(n, -1),
            labels=labels,
            num_classes=int(num_classes),
            name=name,
        )

    # ==================== 基本属性 ====================

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        """无向边数"""
        return int(self.csr_targets.shape[0] // 2)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr_offsets)

    @cached_property
    def edge_index(self) -> Tuple[np.ndarray, np.ndarray]:
        """展开的有向边 (src, dst)，每条无向边出现两次"""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return src, self.csr_targets

    @cached_property
    def closed_edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """加入自环后的边 (src=邻居 u, dst=中心 v)，按 dst 排序"""
        src, dst = self.edge_index
        loops = np.arange(self.n, dtype=np.int64)
        all_src = np.concatenate([dst, loops])
        all_dst = np.concatenate([src, loops])
        order = np.lexsort((all_src, all_dst))
        return all_src[order], all_dst[order]

    def adjacency(self) -> csr_array:
        """scipy CSR 邻接矩阵（0/1）"""
        data = np.ones(self.csr_targets.shape[0])
        return csr_array((data, self.csr_targets, self.csr_offsets), shape=(self.n, self.n))

    def neighbors(self, v: int) -> np.ndarray:
        return self.csr_targets[self.csr_offsets[v]:self.csr_offsets[v + 1]]

    def feature_tensor(self) -> Tensor:
        """特征矩阵的常量张量"""
        return Tensor(self.features, requires_grad=False)

    def relabel(self, pi: np.ndarray) -> "Graph":
        """
        节点重编号：原节点 v 变为 pi[v]

        返回:
            新图，特征行、标签与边一并置换
        """
        pi = np.asarray(pi, dtype=np.int64)
        inverse = np.empty_like(pi)
        inverse[pi] = np.arange(self.n)
        src, dst = self.edge_index
        edges = np.stack([pi[src], pi[dst]], axis=1)
        return Graph.from_edges(self.n, edges, self.features[inverse], self.labels[inverse],
                                self.num_classes, self.name)

    def __repr__(self) -> str:
        return (f"Graph(name='{self.name}', n={self.n}, edges={self.num_edges}, "
                f"features={self.num_features}, classes={self.num_classes})")


@dataclass(frozen=True)
class Split:
    """互不相交的训练/验证/测试节点下标"""
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        sets = [set(self.train.tolist()), set(self.val.tolist()), set(self.test.tolist())]
        if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
            raise ContractError("训练/验证/测试集合必须两两不相交")

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


@dataclass(frozen=True)
class Permutation:
    """
    排序得到的节点排列

    order[i]: 排序位置 i 上的节点
    inverse[v]: 节点 v 的排序位置
    """
    order: np.ndarray
    inverse: np.ndarray = field(repr=False)

    @classmethod
    def from_order(cls, order: np.ndarray) -> "Permutation":
        order = np.asarray(order, dtype=np.int64)
        n = order.shape[0]
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise ContractError("order 不是 [0, n) 上的双射")
        inverse = np.empty_like(order)
        inverse[order] = np.arange(n)
        return cls(order=order, inverse=inverse)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls.from_order(np.arange(n))

    def __len__(self) -> int:
        return int(self.order.shape[0])


@dataclass(frozen=True)
class DatasetStats:
    """数据集统计（对应统计表的一行）"""
    name: str
    nodes: int
    edges: int
    features: int
    classes: int
    homophily: float

    def as_row(self) -> dict:
        return {
            "name": self.name, "nodes": self.nodes, "edges": self.edges,
            "features": self.features, "classes": self.classes,
            "homophily": f"{self.homophily:.4f}",
        }
