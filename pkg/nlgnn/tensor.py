"""
张量与反向模式自动微分核心

Tensor 持有 float64 的 numpy 数组；每个可微运算都是 Function 的子类，
前向时若任一输入需要梯度，就把自己记录到当前线程的 Tape 上。
backward() 沿 Tape 逆序遍历一次，填充所有可达张量的 grad，然后清空 Tape。
"""

import logging
import threading
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ContractError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[float], Sequence[Sequence[float]]]

MAX_RANK = 3


class Tensor:
    """
    参与梯度记录的稠密实数数组

    参数:
        data: 数值（统一转为 float64）
        requires_grad: 是否需要梯度
        name: 可选名称，出错信息与优化器使用
    """

    __array_priority__ = 100

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: Optional[str] = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > MAX_RANK:
            raise ShapeError(f"张量秩最多为 {MAX_RANK}，当前形状 {arr.shape}")
        self.data: np.ndarray = arr
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        """返回不参与梯度记录的副本"""
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def accumulate_grad(self, grad: np.ndarray) -> None:
        if grad.shape != self.data.shape:
            raise ShapeError(f"梯度形状 {grad.shape} 与张量形状 {self.data.shape} 不一致")
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + grad

    # 常用运算符，转发到 functional
    def __add__(self, other: "Tensor") -> "Tensor":
        from .functional import add
        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from .functional import mul
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from .functional import matmul
        return matmul(self, other)

    def sum(self) -> "Tensor":
        from .functional import sum_all
        return sum_all(self)

    def __repr__(self) -> str:
        label = f", name='{self.name}'" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"


# ==================== 梯度记录 ====================

@dataclass
class TapeRecord:
    """一条运算记录"""
    function: "Function"
    inputs: Tuple[Tensor, ...]
    output: Tensor


class Tape:
    """按执行顺序（即拓扑序）记录的运算列表"""

    def __init__(self):
        self.records: List[TapeRecord] = []
        self.enabled = True

    def record(self, function: "Function", inputs: Tuple[Tensor, ...], output: Tensor) -> None:
        if self.enabled:
            self.records.append(TapeRecord(function, inputs, output))

    def clear(self) -> None:
        self.records.clear()

    def __len__(self) -> int:
        return len(self.records)


_local = threading.local()


def get_tape() -> Tape:
    """当前线程的 Tape；每个训练会话独占所在线程的 Tape"""
    tape = getattr(_local, "tape", None)
    if tape is None:
        tape = Tape()
        _local.tape = tape
    return tape


@contextmanager
def no_grad() -> Iterator[None]:
    """在此上下文中的运算不会被记录"""
    tape = get_tape()
    previous = tape.enabled
    tape.enabled = False
    try:
        yield
    finally:
        tape.enabled = previous


def grad_enabled() -> bool:
    return get_tape().enabled


class Function(ABC):
    """
    可微运算基类

    子类实现 forward（接收 numpy 数组）和 backward（接收输出梯度，
    返回与输入一一对应的梯度，不需要梯度的位置可返回 None）。
    """

    def __init__(self, *tensors: Tensor):
        self.tensors = tensors

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *tensors: Tensor, **kwargs: Any) -> Tensor:
        func = cls(*tensors)
        out_data = func.forward(*(t.data for t in tensors), **kwargs)
        tape = get_tape()
        requires_grad = tape.enabled and any(t.requires_grad for t in tensors)
        out = Tensor(out_data, requires_grad=requires_grad)
        if requires_grad:
            tape.record(func, tensors, out)
        return out


def backward(loss: Tensor) -> None:
    """
    从标量损失出发做一次反向传播

    参数:
        loss: 标量张量，必须由 Tape 上记录的运算得到
    """
    tape = get_tape()
    # 失败时同样丢弃本次前向记录
    if loss.data.size != 1:
        tape.clear()
        raise ContractError(f"backward 需要标量损失，当前形状 {loss.shape}")
    if not loss.requires_grad:
        tape.clear()
        raise ContractError("损失不依赖任何需要梯度的张量，无法反向传播")

    loss.grad = np.ones_like(loss.data)
    try:
        for rec in reversed(tape.records):
            out_grad = rec.output.grad
            if out_grad is None:
                continue
            in_grads = rec.function.backward(out_grad)
            for tensor, g in zip(rec.inputs, in_grads):
                if g is None or not tensor.requires_grad:
                    continue
                tensor.accumulate_grad(np.asarray(g, dtype=np.float64).reshape(tensor.shape))
    finally:
        logger.debug("反向传播完成，共 %d 条记录", len(tape))
        tape.clear()


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    """包装为常量张量（已是 Tensor 时原样返回）"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False)


def parameter(data: ArrayLike, name: Optional[str] = None) -> Tensor:
    """创建需要梯度的叶子张量"""
    return Tensor(data, requires_grad=True, name=name)
