"""
计时与复杂度实验、排序结果导出

- bench_runtime: 每个模型训练若干轮，去掉预热轮后取平均每轮耗时，并给出相对 GCN 的倍数
- scaling_experiment: 在随机嵌入上比较排序+卷积聚合与稠密全注意力的前向+反向耗时
- export_sorted: 导出训练后模型的注意力排序，用于外部绘图
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .config import (
    DEFAULT_MAX_EPOCHS, DEFAULT_SCALING_DIM, DEFAULT_SCALING_SIZES, SORTED_CSV_FIELDS, WARMUP_EPOCHS,
    TrainConfig,
)
from .errors import ConfigError, ContractError
from .functional import sum_all
from .graph_data import Graph, Permutation
from .homophily import homophily, label_run_length, reconnected_homophily, shuffle_run_length_median
from .model import ModelParams, forward
from .nonlocal_agg import (
    attention_scores, full_attention_baseline, init_nonlocal, nonlocal_aggregate, sort_permutation,
)
from .reports import environment_descriptor, write_csv
from .splits import split_nodes
from .tensor import backward, get_tape, no_grad, parameter
from .training import train

logger = logging.getLogger(__name__)

REFERENCE_MODEL = "GCN"


# ==================== 每轮训练耗时 ====================

@dataclass
class BenchRow:
    model: str
    ms_per_epoch: float
    slowdown: float

    @property
    def display(self) -> str:
        """表格样式: "26.3 (1.2x)" """
        return f"{self.ms_per_epoch:.1f} ({self.slowdown:.1f}x)"

    def as_row(self) -> dict:
        return {"model": self.model, "ms_per_epoch": round(self.ms_per_epoch, 4),
                "slowdown": round(self.slowdown, 4), "display": self.display}


@dataclass
class BenchReport:
    rows: List[BenchRow]
    reference: str
    epochs: int
    warmup: int
    environment: Dict = field(default_factory=dict)

    def row(self, model: str) -> BenchRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)


_LABEL_FIELDS = (("hidden", "h"), ("dropout", "p"), ("weight_decay", "wd"), ("lr", "lr"),
                 ("kernel_size", "k"), ("seed", "seed"))


def _bench_labels(cfgs: Sequence[TrainConfig]) -> List[str]:
    """同一变体出现多次时，用互不相同的超参数区分行名"""
    labels = []
    for cfg in cfgs:
        group = [c for c in cfgs if c.variant == cfg.variant]
        varying = [(name, short) for name, short in _LABEL_FIELDS
                   if len({getattr(c, name) for c in group}) > 1]
        if len(group) == 1:
            labels.append(cfg.variant)
        else:
            labels.append(cfg.variant + "(" + ",".join(
                f"{short}={getattr(cfg, name)}" for name, short in varying) + ")")
    if len(set(labels)) != len(labels):
        raise ConfigError(f"存在重复的模型配置: {labels}")
    return labels


def bench_runtime(g: Graph, cfgs: Sequence[TrainConfig], epochs: int = DEFAULT_MAX_EPOCHS,
                  warmup: int = WARMUP_EPOCHS, split_seed: int = 0,
                  threads: Optional[int] = None) -> BenchReport:
    """
    逐个模型串行计时

    参数:
        cfgs: 各模型训练配置（max_epochs 以 epochs 为准）
        epochs: 训练轮数
        warmup: 不计时的预热轮数

    返回:
        BenchReport；每个配置一行，倍数以第一个 GCN 行为基准，未包含 GCN 时以第一行为基准
    """
    if not cfgs:
        raise ConfigError("至少需要一个模型配置")
    if epochs <= warmup:
        raise ConfigError(f"训练轮数 {epochs} 必须大于预热轮数 {warmup}")
    labels = _bench_labels(cfgs)
    split = split_nodes(g, seed=split_seed)
    timings: List[float] = []
    for label, cfg in zip(labels, cfgs):
        run, _ = train(g, split, cfg.with_(max_epochs=epochs))
        timings.append(float(np.mean(run.epoch_ms[warmup:])))
        logger.info("%s: %.2f ms/epoch", label, timings[-1])

    ref = next((i for i, cfg in enumerate(cfgs) if cfg.variant == REFERENCE_MODEL), 0)
    base = timings[ref]
    rows = [BenchRow(label, ms, ms / base) for label, ms in zip(labels, timings)]
    reference = labels[ref]
    return BenchReport(rows, reference, epochs, warmup, environment_descriptor(threads))


# ==================== 规模实验 ====================

@dataclass
class ScalingRow:
    n: int
    sorted_ms: float
    baseline_ms: Optional[float]
    note: str = ""

    @property
    def speedup(self) -> Optional[float]:
        if self.baseline_ms is None:
            return None
        return self.baseline_ms / self.sorted_ms

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "sorted_ms": round(self.sorted_ms, 4),
            "baseline_ms": None if self.baseline_ms is None else round(self.baseline_ms, 4),
            "speedup": None if self.speedup is None else round(self.speedup, 3),
            "note": self.note,
        }


@dataclass
class ScalingReport:
    rows: List[ScalingRow]
    sorted_slope: Optional[float]
    baseline_slope: Optional[float]
    partial: bool = False
    environment: Dict = field(default_factory=dict)


def _loglog_slope(ns: Sequence[int], ms: Sequence[float]) -> Optional[float]:
    if len(ns) < 2:
        return None
    slope, _ = np.polyfit(np.log(ns), np.log(ms), 1)
    return float(slope)


def _time_sorted_path(z_data: np.ndarray, kernel_size: int, rng: np.random.Generator) -> float:
    f = z_data.shape[1]
    p = init_nonlocal(f, 2, kernel_size, rng)
    z = parameter(z_data)
    get_tape().clear()
    start = time.perf_counter()
    scores = attention_scores(z, p.c)
    perm = sort_permutation(scores)
    backward(sum_all(nonlocal_aggregate(z, scores, perm, p)))
    return (time.perf_counter() - start) * 1000.0


def _time_baseline(z_data: np.ndarray) -> float:
    z = parameter(z_data)
    get_tape().clear()
    start = time.perf_counter()
    backward(sum_all(full_attention_baseline(z)))
    return (time.perf_counter() - start) * 1000.0


def scaling_experiment(sizes: Sequence[int] = DEFAULT_SCALING_SIZES, f: int = DEFAULT_SCALING_DIM,
                       kernel_size: int = 3, seed: int = 0, repeats: int = 3,
                       threads: Optional[int] = None) -> ScalingReport:
    """
    聚合阶段的规模实验（固定 f、随机输入，不含编码器）

    参数:
        sizes: 严格递增的节点数序列
        repeats: 每个规模重复次数，取中位数

    返回:
        ScalingReport；内存不足时停止并返回已完成部分
    """
    sizes = list(sizes)
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError(f"规模序列必须非空且严格递增: {sizes}")
    if repeats < 1:
        raise ConfigError(f"repeats 必须 >= 1，当前为 {repeats}")

    rng = np.random.default_rng(seed)
    rows: List[ScalingRow] = []
    partial = False
    for n in sizes:
        z_data = rng.normal(size=(n, f))
        sorted_ms = float(np.median([_time_sorted_path(z_data, kernel_size, rng) for _ in range(repeats)]))
        try:
            baseline_ms: Optional[float] = float(np.median([_time_baseline(z_data) for _ in range(repeats)]))
            note = ""
        except MemoryError:
            get_tape().clear()
            baseline_ms, note, partial = None, "全注意力内存不足", True
            logger.warning("n=%d: 全注意力基线内存不足，后续规模跳过", n)
        rows.append(ScalingRow(n, sorted_ms, baseline_ms, note))
        logger.info("n=%d: 排序路径 %.2f ms, 全注意力 %s ms", n, sorted_ms,
                    "-" if baseline_ms is None else f"{baseline_ms:.2f}")
        if partial:
            break

    timed = [r for r in rows if r.baseline_ms is not None]
    return ScalingReport(
        rows=rows,
        sorted_slope=_loglog_slope([r.n for r in rows], [r.sorted_ms for r in rows]),
        baseline_slope=_loglog_slope([r.n for r in timed], [r.baseline_ms for r in timed]),
        partial=partial,
        environment=environment_descriptor(threads),
    )


# ==================== 排序导出 ====================

@dataclass
class SortedExport:
    """导出结果：CSV 路径与聚集程度统计"""
    path: Path
    perm: Permutation
    scores: np.ndarray
    homophily: float
    reconnected_homophily: float
    window: int
    run_length: float
    shuffled_run_length: float

    def summary(self) -> dict:
        return {
            "homophily": round(self.homophily, 6),
            "reconnected_homophily": round(self.reconnected_homophily, 6),
            "window": self.window,
            "run_length": round(self.run_length, 6),
            "shuffled_run_length_median": round(self.shuffled_run_length, 6),
        }


def receptive_half_width(params: ModelParams) -> int:
    """卷积栈在排序序列上的感受野半宽: 每层 (k-1)/2"""
    p = params.nonlocal_
    layers = 1 if p.conv2 is None else 2
    return layers * (p.kernel_size - 1) // 2


def export_sorted(g: Graph, params: Optional[ModelParams], out: Union[str, Path],
                  s: Optional[int] = None, seed: int = 0) -> SortedExport:
    """
    按注意力排序写出 (sorted_position, node_id, attention_score, label)

    参数:
        params: 训练好的 NL 模型参数
        s: 重连图半宽，缺省为卷积感受野半宽
        seed: 随机打乱对照的种子
    """
    if params is None or params.nonlocal_ is None:
        raise ContractError("缺少校准向量：需要训练好的 NL 变体参数")
    if params.config.in_dim != g.num_features or params.config.num_classes != g.num_classes:
        raise ContractError(
            f"参数结构 (d={params.config.in_dim}, C={params.config.num_classes}) "
            f"与图 (d={g.num_features}, C={g.num_classes}) 不一致")
    with no_grad():
        result = forward(params, g, training=False)
    scores = result.scores.data
    perm = result.perm
    window = receptive_half_width(params) if s is None else s

    rows = [{"sorted_position": i, "node_id": int(v), "attention_score": repr(float(scores[v])),
             "label": int(g.labels[v])} for i, v in enumerate(perm.order)]
    path = write_csv(out, SORTED_CSV_FIELDS, rows)
    labels_in_order = g.labels[perm.order]
    export = SortedExport(
        path=path,
        perm=perm,
        scores=scores,
        homophily=homophily(g),
        reconnected_homophily=reconnected_homophily(g, perm, window),
        window=window,
        run_length=label_run_length(labels_in_order),
        shuffled_run_length=shuffle_run_length_median(g.labels, seed=seed),
    )
    logger.info("%s: H(G)=%.4f, H(Ĝ)=%.4f (s=%d)", g.name, export.homophily,
                export.reconnected_homophily, window)
    return export
