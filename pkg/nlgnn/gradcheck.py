"""
有限差分梯度检查
"""

from typing import Callable, Dict, Mapping

import numpy as np

from .tensor import Tensor, backward, get_tape, no_grad

DEFAULT_EPS = 1e-5


def numerical_grad(loss_fn: Callable[[], Tensor], tensor: Tensor, eps: float = DEFAULT_EPS) -> np.ndarray:
    """对 tensor 的每个分量做中心差分"""
    tensor.data = np.ascontiguousarray(tensor.data)
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = loss_fn().item()
            flat[i] = original - eps
            minus = loss_fn().item()
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * eps)
    return grad


def analytic_grads(loss_fn: Callable[[], Tensor], params: Mapping[str, Tensor]) -> Dict[str, np.ndarray]:
    """一次前向 + 反向得到的梯度"""
    for tensor in params.values():
        tensor.zero_grad()
    get_tape().clear()
    backward(loss_fn())
    return {name: (t.grad if t.grad is not None else np.zeros_like(t.data)) for name, t in params.items()}


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """max|g-ĝ| / max(max|g|, max|ĝ|, floor)"""
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def check_gradients(loss_fn: Callable[[], Tensor], params: Mapping[str, Tensor],
                    eps: float = DEFAULT_EPS) -> Dict[str, float]:
    """
    比较反向传播梯度与中心差分

    返回:
        {参数名: 相对误差}
    """
    analytic = analytic_grads(loss_fn, params)
    return {name: relative_error(analytic[name], numerical_grad(loss_fn, tensor, eps))
            for name, tensor in params.items()}
