#!/usr/bin/env python3
"""
数据源抽象层
定义统一的图数据源接口，支持文件数据集（清单文件）和合成图
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .errors import IngestionError
from .graph_data import Graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_KEYS = ("name", "edges", "features", "labels", "classes")


# ==================== 文件读取 ====================

def _read_edges(path: Path, n: int) -> np.ndarray:
    """读取边文件：每行 "u v"，'#' 之后为注释"""
    edges: List[List[int]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise IngestionError(f"每行应为两个节点编号，实际为: {raw.strip()!r}", str(path), lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise IngestionError(f"节点编号必须为整数: {raw.strip()!r}", str(path), lineno) from None
            for node in (u, v):
                if not 0 <= node < n:
                    raise IngestionError(f"悬空节点编号 {node}（共 {n} 个节点）", str(path), lineno)
            edges.append([u, v])
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def _read_features(path: Path) -> np.ndarray:
    try:
        features = np.loadtxt(path, dtype=np.float64, ndmin=2, comments="#")
    except ValueError as e:
        raise IngestionError(f"特征文件格式错误: {e}", str(path)) from None
    return features


def _read_labels(path: Path) -> np.ndarray:
    try:
        labels = np.loadtxt(path, dtype=np.int64, ndmin=1, comments="#")
    except ValueError as e:
        raise IngestionError(f"标签文件格式错误: {e}", str(path)) from None
    return labels


def load_graph(edges_path: PathLike, features_path: PathLike, labels_path: PathLike,
               num_classes: Optional[int] = None, name: Optional[str] = None) -> Graph:
    """
    从三份文本文件读取图

    参数:
        edges_path: 边文件，每行 "u v"（0 起始编号）
        features_path: 特征文件，每行一个节点的 d 个实数
        labels_path: 标签文件，每行一个整数类别
        num_classes: 类别数（缺省为最大标签 + 1）

    返回:
        对称化、去重、无自环的 Graph；节点按特征/标签文件的行序编号
    """
    edges_path, features_path, labels_path = Path(edges_path), Path(features_path), Path(labels_path)
    for path in (edges_path, features_path, labels_path):
        if not path.exists():
            raise FileNotFoundError(f"数据文件不存在: {path}")

    features = _read_features(features_path)
    labels = _read_labels(labels_path)
    if features.shape[0] != labels.shape[0]:
        raise IngestionError(
            f"特征行数 {features.shape[0]} 与标签行数 {labels.shape[0]} 不一致", str(labels_path))
    n = labels.shape[0]
    edges = _read_edges(edges_path, n)
    if num_classes is not None and labels.size and labels.max() >= num_classes:
        raise IngestionError(f"标签 {labels.max()} 超出类别数 {num_classes}", str(labels_path))

    graph = Graph.from_edges(n, edges, features, labels, num_classes, name or edges_path.stem)
    logger.info("已读取 %s: %d 个节点, %d 条边", graph.name, graph.n, graph.num_edges)
    return graph


# ==================== 数据集清单 ====================

@dataclass(frozen=True)
class DatasetManifest:
    """数据集清单：三个文件路径、类别数与名称"""
    name: str
    edges: Path
    features: Path
    labels: Path
    classes: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        return {k: (str(v) if isinstance(v, Path) else v) for k, v in d.items()}


def read_manifest(path: PathLike) -> DatasetManifest:
    """
    读取键值清单文件

    格式:
        name = cornell
        edges = cornell.edges
        features = cornell.features
        labels = cornell.labels
        classes = 5
    相对路径相对于清单文件所在目录
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"清单文件不存在: {path}")
    entries: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise IngestionError(f"无法解析清单行: {raw.strip()!r}", str(path), lineno)
            key, value = (part.strip() for part in line.split(sep, 1))
            if key not in MANIFEST_KEYS:
                raise IngestionError(f"未知清单键 {key!r}，可用: {list(MANIFEST_KEYS)}", str(path), lineno)
            entries[key] = value

    for key in ("edges", "features", "labels"):
        if key not in entries:
            raise IngestionError(f"清单缺少 {key!r}", str(path))
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    classes = entries.get("classes")
    try:
        num_classes = int(classes) if classes is not None else None
    except ValueError:
        raise IngestionError(f"classes 必须为整数: {classes!r}", str(path)) from None
    return DatasetManifest(
        name=entries.get("name", path.stem),
        edges=resolve(entries["edges"]),
        features=resolve(entries["features"]),
        labels=resolve(entries["labels"]),
        classes=num_classes,
    )


def load_manifest(path: PathLike) -> Graph:
    """按清单读取图"""
    m = read_manifest(path)
    return load_graph(m.edges, m.features, m.labels, m.classes, m.name)


def write_graph(graph: Graph, directory: PathLike, name: Optional[str] = None) -> Path:
    """
    把图写成三份文本文件和一份清单

    返回:
        清单文件路径
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = name or graph.name
    src, dst = graph.edge_index
    upper = src < dst
    edges_file = directory / f"{name}.edges"
    features_file = directory / f"{name}.features"
    labels_file = directory / f"{name}.labels"
    manifest_file = directory / f"{name}.manifest"

    with open(edges_file, "w", encoding="utf-8") as f:
        f.write(f"# {name}: {graph.n} nodes, {graph.num_edges} undirected edges\n")
        for u, v in zip(src[upper].tolist(), dst[upper].tolist()):
            f.write(f"{u} {v}\n")
    np.savetxt(features_file, graph.features, fmt="%.10g")
    np.savetxt(labels_file, graph.labels, fmt="%d")
    with open(manifest_file, "w", encoding="utf-8") as f:
        f.write(f"name = {name}\n")
        f.write(f"edges = {edges_file.name}\n")
        f.write(f"features = {features_file.name}\n")
        f.write(f"labels = {labels_file.name}\n")
        f.write(f"classes = {graph.num_classes}\n")
    logger.info("已写出 %s 到 %s", name, directory)
    return manifest_file


# ==================== 数据源基类 ====================

class GraphSource(ABC):
    """图数据源抽象基类"""

    @property
    @abstractmethod
    def name(self) -> str:
        """数据源名称"""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """数据源描述"""
        pass

    @property
    def is_synthetic(self) -> bool:
        return False

    @abstractmethod
    def load(self) -> Graph:
        """读取（或生成）图"""
        pass


class ManifestGraphSource(GraphSource):
    """清单文件描述的数据集"""

    def __init__(self, manifest_path: PathLike):
        self.manifest_path = Path(manifest_path)
        self._manifest: Optional[DatasetManifest] = None
        self._graph: Optional[Graph] = None

    @property
    def manifest(self) -> DatasetManifest:
        if self._manifest is None:
            self._manifest = read_manifest(self.manifest_path)
        return self._manifest

    @property
    def name(self) -> str:
        return self.manifest.name

    @property
    def description(self) -> str:
        return f"清单数据集 {self.manifest_path}"

    def load(self) -> Graph:
        # 图不可变，读取一次后缓存
        if self._graph is None:
            m = self.manifest
            self._graph = load_graph(m.edges, m.features, m.labels, m.classes, m.name)
        return self._graph


class SyntheticGraphSource(GraphSource):
    """按参数生成的合成图"""

    def __init__(self, seed: int = 0, **params: Any):
        from .config import SYNTHETIC_DEFAULTS
        self.params = {**SYNTHETIC_DEFAULTS, **params}
        self.seed = seed
        self._graph: Optional[Graph] = None

    @property
    def name(self) -> str:
        p = self.params
        return f"synthetic-n{p['n']}-c{p['num_classes']}-h{p['target_h']}-s{self.seed}"

    @property
    def description(self) -> str:
        return f"合成图 {self.params}"

    @property
    def is_synthetic(self) -> bool:
        return True

    def load(self) -> Graph:
        if self._graph is None:
            from .synthetic import generate_synthetic
            self._graph = generate_synthetic(seed=self.seed, name=self.name, **self.params)
        return self._graph


# ==================== 数据源管理器 ====================

class GraphSourceManager:
    """
    数据源管理器

    按清单路径缓存已读取的数据源
    """

    def __init__(self):
        self._sources: Dict[str, GraphSource] = {}

    def get_source(self, manifest_path: PathLike) -> GraphSource:
        key = str(Path(manifest_path).resolve())
        if key not in self._sources:
            self._sources[key] = ManifestGraphSource(manifest_path)
        return self._sources[key]

    def get_graph(self, manifest_path: PathLike) -> Graph:
        return self.get_source(manifest_path).load()

    def list_sources(self) -> List[str]:
        return sorted(self._sources)


# ==================== 全局单例 ====================

_default_manager: Optional[GraphSourceManager] = None


def get_graph_source_manager() -> GraphSourceManager:
    """获取默认数据源管理器"""
    global _default_manager
    if _default_manager is None:
        _default_manager = GraphSourceManager()
    return _default_manager


def get_graph(manifest_path: PathLike) -> Graph:
    """快捷函数：按清单获取图"""
    return get_graph_source_manager().get_graph(manifest_path)
