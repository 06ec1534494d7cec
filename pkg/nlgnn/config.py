# 非局部图神经网络配置文件
# Non-local GNN Configuration

import os
from dataclasses import dataclass, replace, asdict
from typing import Dict, Any, Tuple

from .errors import ConfigError

# ====================================================
# 模型与超参数网格
# ====================================================

VARIANTS: Tuple[str, ...] = ("MLP", "GCN", "GAT", "NLMLP", "NLGCN", "NLGAT")
NONLOCAL_VARIANTS: Tuple[str, ...] = ("NLMLP", "NLGCN", "NLGAT")

HIDDEN_GRID: Tuple[int, ...] = (16, 48, 96)
DROPOUT_GRID: Tuple[float, ...] = (0.0, 0.5, 0.8)
WEIGHT_DECAY_GRID: Tuple[float, ...] = (0.0, 5e-4, 5e-5, 5e-6)
LR_GRID: Tuple[float, ...] = (0.01, 0.05)
KERNEL_GRID: Tuple[int, ...] = (3, 5)

# GAT 超参数（第一层多头拼接，第二层单头）
GAT_HEADS = 8
GAT_NEGATIVE_SLOPE = 0.2

# Adam
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# ====================================================
# 训练与测速
# ====================================================

DEFAULT_MAX_EPOCHS = 500
WARMUP_EPOCHS = 10
DEFAULT_REPEATS = 10
SPLIT_RATIOS: Tuple[float, float, float] = (0.6, 0.2, 0.2)
DEFAULT_SCALING_SIZES: Tuple[int, ...] = (1024, 2048, 4096, 8192)
DEFAULT_SCALING_DIM = 16

# ====================================================
# 合成图默认参数
# ====================================================

SYNTHETIC_DEFAULTS: Dict[str, Any] = {
    "n": 2000,
    "num_classes": 5,
    "target_h": 0.1,
    "d": 50,
    "mean_degree": 5.0,
    "feature_noise": 0.35,
}

# 调试断言：每次前向检查排序后的分数非递减
DEBUG_CHECKS = os.environ.get("NLGNN_DEBUG", "0") == "1"


def set_debug(enabled: bool) -> None:
    """开关调试断言"""
    global DEBUG_CHECKS
    DEBUG_CHECKS = bool(enabled)


def debug_enabled() -> bool:
    return DEBUG_CHECKS


# ====================================================
# 训练配置定义
# ====================================================

@dataclass(frozen=True)
class TrainConfig:
    """训练配置类"""
    variant: str = "NLMLP"
    hidden: int = 48
    dropout: float = 0.5
    weight_decay: float = 5e-4
    lr: float = 0.01
    kernel_size: int = 3
    max_epochs: int = DEFAULT_MAX_EPOCHS
    seed: int = 0

    @property
    def is_nonlocal(self) -> bool:
        return self.variant in NONLOCAL_VARIANTS

    def validate(self) -> "TrainConfig":
        """检查配置是否落在超参数网格内，非法时抛出 ConfigError"""
        if self.variant not in VARIANTS:
            raise ConfigError(f"未知模型: {self.variant}，可用: {list(VARIANTS)}")
        if self.hidden not in HIDDEN_GRID:
            raise ConfigError(f"hidden={self.hidden} 不在网格 {HIDDEN_GRID} 内")
        if self.dropout not in DROPOUT_GRID:
            raise ConfigError(f"dropout={self.dropout} 不在网格 {DROPOUT_GRID} 内")
        if self.weight_decay not in WEIGHT_DECAY_GRID:
            raise ConfigError(f"weight_decay={self.weight_decay} 不在网格 {WEIGHT_DECAY_GRID} 内")
        if self.lr not in LR_GRID:
            raise ConfigError(f"lr={self.lr} 不在网格 {LR_GRID} 内")
        if self.kernel_size not in KERNEL_GRID:
            raise ConfigError(f"kernel_size={self.kernel_size} 不在网格 {KERNEL_GRID} 内")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs 必须 >= 1，当前为 {self.max_epochs}")
        return self

    def with_(self, **changes: Any) -> "TrainConfig":
        """返回修改了部分字段的新配置"""
        if "variant" in changes:
            changes["variant"] = str(changes["variant"]).upper()
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    # 预定义的训练配置
    @classmethod
    def preset(cls, mode: str = "full", variant: str = "NLMLP") -> "TrainConfig":
        variant = variant.upper()
        if mode == "full":
            return cls(variant=variant)
        if mode == "fast":
            return cls(variant=variant, hidden=16, dropout=0.0, lr=0.05, max_epochs=100)
        raise ConfigError(f"未知预设: {mode}，可用: ['full', 'fast']")


# ====================================================
# 报表字段
# ====================================================

STATS_CSV_FIELDS = ["name", "nodes", "edges", "features", "classes", "homophily"]

RUN_CSV_FIELDS = [
    "variant", "seed", "test_accuracy", "best_val_accuracy", "best_epoch", "wall_ms_per_epoch",
]

EVALUATE_CSV_FIELDS = ["variant", "mean", "std", "repeats"]

CATEGORY_CSV_FIELDS = ["model", "mean", "std"]

LEADERBOARD_CSV_FIELDS = [
    "rank", "variant", "hidden", "dropout", "weight_decay", "lr", "kernel_size",
    "mean_val_accuracy", "mean_test_accuracy",
]

BENCH_CSV_FIELDS = ["model", "ms_per_epoch", "slowdown", "display"]

SCALING_CSV_FIELDS = ["n", "sorted_ms", "baseline_ms", "speedup", "note"]

SORTED_CSV_FIELDS = ["sorted_position", "node_id", "attention_score", "label"]
