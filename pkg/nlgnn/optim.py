"""
Adam 优化器
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from .config import ADAM_BETA1, ADAM_BETA2, ADAM_EPS
from .errors import ShapeError, TrainingError
from .tensor import Tensor


@dataclass
class AdamState:
    """一阶/二阶矩估计与步数"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: AdamState,
              lr: float, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2, eps: float = ADAM_EPS,
              weight_decay: float = 0.0) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """
    带偏差修正的 Adam 更新，权重衰减以 L2 梯度项加入

    参数:
        params / grads: 参数名 -> 数组
        state: 上一步的状态（原地更新后返回）

    返回:
        (新参数字典, 状态)
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"参数 {name} 的梯度出现非有限值", param=name)

    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t

    updated: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        g = grads[name]
        if g.shape != value.shape:
            raise ShapeError(f"参数 {name} 形状 {value.shape} 与梯度形状 {g.shape} 不一致")
        if weight_decay:
            g = g + weight_decay * value
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
    return updated, state


class Adam:
    """
    管理一组命名张量参数的 Adam 优化器

    参数:
        params: 参数名 -> 需要梯度的 Tensor
        lr: 学习率
        weight_decay: L2 权重衰减系数
    """

    def __init__(self, params: Mapping[str, Tensor], lr: float, weight_decay: float = 0.0,
                 beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2, eps: float = ADAM_EPS):
        self.params = dict(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.zero_grad()

    def step(self) -> None:
        values = {name: t.data for name, t in self.params.items()}
        # 未被损失触及的参数梯度视为 0
        grads = {name: t.grad if t.grad is not None else np.zeros_like(t.data)
                 for name, t in self.params.items()}
        updated, self.state = adam_step(values, grads, self.state, self.lr, self.beta1,
                                        self.beta2, self.eps, self.weight_decay)
        for name, tensor in self.params.items():
            tensor.data = updated[name]
