"""
训练、模型选择、超参数网格搜索与数据集分类

模型选择只看验证集准确率；测试集准确率在每次运行结束时计算一次，
使用的是验证准确率最高（并列取最早）那一轮保存下来的预测。
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import (
    DEFAULT_REPEATS, DROPOUT_GRID, GAT_HEADS, HIDDEN_GRID, KERNEL_GRID, LR_GRID, VARIANTS,
    WARMUP_EPOCHS, WEIGHT_DECAY_GRID, TrainConfig,
)
from .errors import ConfigError, ContractError, TrainingError
from .functional import softmax_cross_entropy
from .graph_data import Graph, Split
from .layers import normalized_adjacency_matrix
from .model import ModelConfig, ModelParams, forward, init_model
from .optim import Adam
from .splits import split_nodes
from .tensor import backward, get_tape, no_grad

logger = logging.getLogger(__name__)


# ==================== 结果类型 ====================

@dataclass
class RunResult:
    """单次训练的结果"""
    variant: str
    seed: int
    test_accuracy: float
    best_val_accuracy: float
    best_epoch: int
    losses: List[float] = field(default_factory=list)
    epoch_ms: List[float] = field(default_factory=list)

    @property
    def wall_ms_per_epoch(self) -> float:
        """预热轮之后的平均每轮耗时（总轮数不超过预热轮数时取全部）"""
        timed = self.epoch_ms[WARMUP_EPOCHS:] or self.epoch_ms
        return float(np.mean(timed)) if timed else 0.0

    def as_row(self) -> dict:
        return {
            "variant": self.variant,
            "seed": self.seed,
            "test_accuracy": round(self.test_accuracy, 6),
            "best_val_accuracy": round(self.best_val_accuracy, 6),
            "best_epoch": self.best_epoch,
            "wall_ms_per_epoch": round(self.wall_ms_per_epoch, 3),
        }


@dataclass
class EvaluationResult:
    """多次随机划分下的测试准确率"""
    variant: str
    mean: float
    std: float
    runs: List[RunResult]

    @property
    def seeds(self) -> List[int]:
        return [r.seed for r in self.runs]

    def as_row(self) -> dict:
        return {"variant": self.variant, "mean": round(self.mean, 6), "std": round(self.std, 6),
                "repeats": len(self.runs)}


@dataclass
class CategoryReport:
    """MLP 与常规 GNN 的对比结论"""
    category: int
    evidence: Dict[str, EvaluationResult]

    @property
    def label(self) -> str:
        return f"Category{self.category}"

    def rows(self) -> List[dict]:
        return [{"model": name, "mean": round(r.mean, 6), "std": round(r.std, 6)}
                for name, r in self.evidence.items()]


@dataclass
class LeaderboardEntry:
    config: TrainConfig
    mean_val_accuracy: float
    mean_test_accuracy: float

    def as_row(self, rank: int) -> dict:
        c = self.config
        return {
            "rank": rank, "variant": c.variant, "hidden": c.hidden, "dropout": c.dropout,
            "weight_decay": c.weight_decay, "lr": c.lr, "kernel_size": c.kernel_size,
            "mean_val_accuracy": round(self.mean_val_accuracy, 6),
            "mean_test_accuracy": round(self.mean_test_accuracy, 6),
        }


@dataclass
class GridResult:
    best: TrainConfig
    leaderboard: List[LeaderboardEntry]

    def rows(self) -> List[dict]:
        return [entry.as_row(rank) for rank, entry in enumerate(self.leaderboard, start=1)]


# ==================== 单次训练 ====================

def accuracy(predictions: np.ndarray, labels: np.ndarray, nodes: np.ndarray) -> float:
    """nodes 上预测正确的比例"""
    if nodes.size == 0:
        raise ContractError("节点集合为空，准确率无定义")
    return float(np.mean(predictions[nodes] == labels[nodes]))


def train(g: Graph, split: Split, cfg: TrainConfig,
          heads: int = GAT_HEADS) -> Tuple[RunResult, ModelParams]:
    """
    全批量训练

    参数:
        g: 图
        split: 训练/验证/测试划分
        cfg: 训练配置（必须落在超参数网格内）
        heads: GAT 第一层头数

    返回:
        (RunResult, 验证准确率最高那一轮的参数)
    """
    cfg.validate()
    if split.train.size == 0 or split.val.size == 0 or split.test.size == 0:
        raise ContractError(f"划分中存在空集合: {split.sizes()}")

    model_cfg = ModelConfig.from_train_config(cfg, g.num_features, g.num_classes, heads)
    params = init_model(model_cfg, np.random.default_rng(cfg.seed))
    named = params.named_parameters()
    optimizer = Adam(named, lr=cfg.lr, weight_decay=cfg.weight_decay)
    features = g.feature_tensor()
    adjacency = normalized_adjacency_matrix(g) if model_cfg.encoder_variant == "GCN" else None
    labels = g.labels

    best_val, best_epoch = -1.0, 0
    best_pred: Optional[np.ndarray] = None
    best_state: Dict[str, np.ndarray] = {}
    losses: List[float] = []
    epoch_ms: List[float] = []

    for epoch in range(1, cfg.max_epochs + 1):
        start = time.perf_counter()
        optimizer.zero_grad()
        get_tape().clear()
        try:
            out = forward(params, g, training=True, rng=np.random.default_rng([cfg.seed, epoch]),
                          adjacency=adjacency, features=features)
        except ContractError as e:
            raise TrainingError(f"前向计算失败: {e}", epoch=epoch) from e
        loss = softmax_cross_entropy(out.logits, labels, split.train)
        value = loss.item()
        if not np.isfinite(value):
            get_tape().clear()
            raise TrainingError(f"损失发散: {value}", epoch=epoch)
        backward(loss)
        try:
            optimizer.step()
        except TrainingError as e:
            raise TrainingError(str(e), epoch=epoch, param=e.param) from e

        with no_grad():
            evaluated = forward(params, g, training=False, adjacency=adjacency, features=features)
        pred = evaluated.logits.data.argmax(axis=1)
        val_acc = accuracy(pred, labels, split.val)
        if val_acc > best_val:
            best_val, best_epoch, best_pred = val_acc, epoch, pred
            best_state = {name: t.data.copy() for name, t in named.items()}

        losses.append(value)
        epoch_ms.append((time.perf_counter() - start) * 1000.0)
        logger.debug("%s seed=%d epoch=%d loss=%.5f val=%.4f", cfg.variant, cfg.seed, epoch, value, val_acc)

    for name, tensor in named.items():
        tensor.data = best_state[name]
    # 测试集只在这里读取一次
    test_acc = accuracy(best_pred, labels, split.test)
    result = RunResult(cfg.variant, cfg.seed, test_acc, best_val, best_epoch, losses, epoch_ms)
    logger.info("%s seed=%d: 最佳验证 %.4f (第 %d 轮), 测试 %.4f",
                cfg.variant, cfg.seed, best_val, best_epoch, test_acc)
    return result, params


# ==================== 多次重复 ====================

def _check_seeds(seeds: Sequence[int]) -> List[int]:
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("至少需要一个随机种子")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"随机种子必须互不相同: {seeds}")
    return seeds


def evaluate_mean(g: Graph, cfg: TrainConfig, n_repeats: int = DEFAULT_REPEATS,
                  seeds: Optional[Sequence[int]] = None, heads: int = GAT_HEADS) -> EvaluationResult:
    """
    在不同随机划分上重复训练，报告测试准确率的均值和标准差

    参数:
        n_repeats: 重复次数（seeds 缺省时使用 0..n_repeats-1）
        seeds: 显式指定的种子，每个种子同时决定划分和初始化
    """
    seeds = _check_seeds(range(n_repeats) if seeds is None else seeds)
    runs = []
    for seed in seeds:
        split = split_nodes(g, seed=seed)
        run, _ = train(g, split, cfg.with_(seed=seed), heads)
        runs.append(run)
    accs = np.array([r.test_accuracy for r in runs])
    result = EvaluationResult(cfg.variant, float(accs.mean()), float(accs.std()), runs)
    logger.info("%s: %d 次平均测试准确率 %.4f ± %.4f", cfg.variant, len(runs), result.mean, result.std)
    return result


def categorize_dataset(g: Graph, seeds: Optional[Sequence[int]] = None,
                       base: Optional[TrainConfig] = None) -> CategoryReport:
    """
    比较 MLP 与 GCN/GAT：MLP 均值严格高于两者最大值时为第一类（局部聚合有害），否则第二类
    """
    base = base or TrainConfig()
    seeds = _check_seeds(range(DEFAULT_REPEATS) if seeds is None else seeds)
    evidence = {variant: evaluate_mean(g, base.with_(variant=variant), seeds=seeds)
                for variant in ("MLP", "GCN", "GAT")}
    gnn_best = max(evidence["GCN"].mean, evidence["GAT"].mean)
    category = 1 if evidence["MLP"].mean > gnn_best else 2
    logger.info("%s 判定为 Category%d (MLP %.4f, GNN 最佳 %.4f)", g.name, category,
                evidence["MLP"].mean, gnn_best)
    return CategoryReport(category, evidence)


# ==================== 网格搜索 ====================

def default_grid(variant: str) -> Dict[str, Tuple]:
    """完整网格；kernel_size 只对 NL 变体搜索"""
    grid: Dict[str, Tuple] = {
        "hidden": HIDDEN_GRID,
        "dropout": DROPOUT_GRID,
        "weight_decay": WEIGHT_DECAY_GRID,
        "lr": LR_GRID,
    }
    if variant.upper().startswith("NL"):
        grid["kernel_size"] = KERNEL_GRID
    return grid


def grid_configs(variant: str, grid: Optional[Mapping[str, Sequence]] = None,
                 base: Optional[TrainConfig] = None) -> List[TrainConfig]:
    """按固定顺序枚举网格中的全部配置"""
    variant = variant.upper()
    if variant not in VARIANTS:
        raise ConfigError(f"未知模型: {variant}，可用: {list(VARIANTS)}")
    base = (base or TrainConfig()).with_(variant=variant)
    grid = dict(default_grid(variant) if grid is None else grid)
    unknown = set(grid) - set(default_grid("NL"))
    if unknown:
        raise ConfigError(f"未知网格维度: {sorted(unknown)}")
    keys = list(grid)
    return [base.with_(**dict(zip(keys, values))) for values in itertools.product(*(grid[k] for k in keys))]


def grid_search(g: Graph, split_seeds: Sequence[int], variant: str,
                grid: Optional[Mapping[str, Sequence]] = None, base: Optional[TrainConfig] = None,
                workers: int = 1,
                on_cell: Optional[Callable[[LeaderboardEntry], None]] = None) -> GridResult:
    """
    穷举网格，按跨种子平均验证准确率排序

    参数:
        split_seeds: 每个格点都在这些种子的划分上训练
        grid: 维度名 -> 候选值；缺省为完整网格
        workers: 并行线程数（每个格点独占自己的参数与 Tape）
        on_cell: 每个格点完成后的回调

    返回:
        GridResult，排行榜按平均验证准确率非递增（并列保持枚举顺序）
    """
    seeds = _check_seeds(split_seeds)
    configs = grid_configs(variant, grid, base)
    splits = {seed: split_nodes(g, seed=seed) for seed in seeds}
    logger.info("%s 网格搜索: %d 个格点 × %d 个种子", variant, len(configs), len(seeds))

    def run_cell(cfg: TrainConfig) -> LeaderboardEntry:
        runs = [train(g, splits[seed], cfg.with_(seed=seed))[0] for seed in seeds]
        entry = LeaderboardEntry(
            config=cfg,
            mean_val_accuracy=float(np.mean([r.best_val_accuracy for r in runs])),
            mean_test_accuracy=float(np.mean([r.test_accuracy for r in runs])),
        )
        if on_cell is not None:
            on_cell(entry)
        return entry

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(run_cell, configs))
    else:
        entries = [run_cell(cfg) for cfg in configs]

    leaderboard = sorted(entries, key=lambda e: -e.mean_val_accuracy)
    return GridResult(best=leaderboard[0].config, leaderboard=leaderboard)
