"""
按类分层的随机划分
"""

import math
from typing import Sequence

import numpy as np

from .config import SPLIT_RATIOS
from .errors import ConfigError, SplitError
from .graph_data import Graph, Split

MIN_CLASS_SIZE = 3


def split_nodes(g: Graph, ratios: Sequence[float] = SPLIT_RATIOS, seed: int = 0) -> Split:
    """
    每个类别内随机划分训练/验证/测试

    验证、测试按比例向下取整，余数归入训练集；同一种子结果相同。

    参数:
        ratios: (train, val, test) 比例，和为 1
        seed: 随机种子
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0):
        raise ConfigError(f"划分比例必须是三个和为 1 的非负数，当前为 {tuple(ratios)}")
    _, val_ratio, test_ratio = ratios
    counts = np.bincount(g.labels, minlength=g.num_classes)
    for label, count in enumerate(counts):
        if count < MIN_CLASS_SIZE:
            raise SplitError(f"类别 {label} 只有 {count} 个节点，至少需要 {MIN_CLASS_SIZE} 个", label)

    rng = np.random.default_rng(seed)
    train, val, test = [], [], []
    for label in range(g.num_classes):
        nodes = rng.permutation(np.flatnonzero(g.labels == label))
        m = nodes.shape[0]
        # 加小量避免 0.2*15 之类的浮点误差
        n_val = int(math.floor(val_ratio * m + 1e-9))
        n_test = int(math.floor(test_ratio * m + 1e-9))
        val.append(nodes[:n_val])
        test.append(nodes[n_val:n_val + n_test])
        train.append(nodes[n_val + n_test:])
    return Split(
        train=np.sort(np.concatenate(train)),
        val=np.sort(np.concatenate(val)),
        test=np.sort(np.concatenate(test)),
    )
