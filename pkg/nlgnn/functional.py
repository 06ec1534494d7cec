"""
可微运算集合

每个运算由一个 Function 子类实现前向/反向，外层同名函数负责参数检查。
图相关的稀疏运算（spmm、segment_sum、edge_softmax）也放在这里，
稀疏结构本身作为常量传入，不参与求导。
"""

from typing import Optional, Tuple, Union

import numpy as np
from scipy.sparse import csr_array

from .errors import ConfigError, ContractError, ShapeError
from .tensor import Function, Tensor, as_tensor


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度求和还原到原形状"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ==================== 线性代数 ====================

class MatMul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        if self.b.ndim == 1:
            return np.outer(grad, self.b), self.a.T @ grad
        return grad @ self.b.T, self.a.T @ grad


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """矩阵乘法 a[m×k]·b[k×p]（b 也可以是长度 k 的向量）"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul 维度不匹配: {a.shape} 与 {b.shape}")
    return MatMul.apply(a, b)


class Transpose(Function):
    def forward(self, x):
        return x.T.copy()

    def backward(self, grad):
        return (grad.T,)


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise ShapeError(f"transpose 需要二维张量，当前形状 {x.shape}")
    return Transpose.apply(x)


class SpMM(Function):
    """常量稀疏矩阵左乘稠密张量"""

    def forward(self, x, matrix=None):
        self.matrix = matrix
        return np.asarray(matrix @ x)

    def backward(self, grad):
        return (np.asarray(self.matrix.T @ grad),)


def spmm(matrix: csr_array, x: Tensor) -> Tensor:
    if matrix.shape[1] != x.shape[0]:
        raise ShapeError(f"spmm 维度不匹配: {matrix.shape} 与 {x.shape}")
    return SpMM.apply(x, matrix=matrix)


# ==================== 逐元素运算 ====================

class Add(Function):
    def forward(self, a, b):
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad):
        return _unbroadcast(grad, self.shapes[0]), _unbroadcast(grad, self.shapes[1])


def add(a: Tensor, b: Tensor) -> Tensor:
    """加法，支持 [n×g] + [g] 形式的行广播"""
    a, b = as_tensor(a), as_tensor(b)
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"add 维度不匹配: {a.shape} 与 {b.shape}") from None
    return Add.apply(a, b)


class Mul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a * b

    def backward(self, grad):
        return _unbroadcast(grad * self.b, self.a.shape), _unbroadcast(grad * self.a, self.b.shape)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"mul 维度不匹配: {a.shape} 与 {b.shape}") from None
    return Mul.apply(a, b)


class SumAll(Function):
    def forward(self, x):
        self.shape = x.shape
        return np.asarray(x.sum())

    def backward(self, grad):
        return (np.full(self.shape, float(grad)),)


def sum_all(x: Tensor) -> Tensor:
    return SumAll.apply(as_tensor(x))


class ReLU(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad):
        return (grad * self.mask,)


def relu(x: Tensor) -> Tensor:
    return ReLU.apply(as_tensor(x))


class LeakyReLU(Function):
    def forward(self, x, slope=0.2):
        self.factor = np.where(x > 0, 1.0, slope)
        return x * self.factor

    def backward(self, grad):
        return (grad * self.factor,)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    return LeakyReLU.apply(as_tensor(x), slope=slope)


class Log(Function):
    def forward(self, x):
        self.x = x
        return np.log(x)

    def backward(self, grad):
        return (grad / self.x,)


def log(x: Tensor) -> Tensor:
    return Log.apply(as_tensor(x))


class ScaleRows(Function):
    def forward(self, z, a):
        self.z, self.a = z, a
        return z * a[:, None]

    def backward(self, grad):
        return grad * self.a[:, None], (grad * self.z).sum(axis=1)


def scale_rows(z: Tensor, a: Tensor) -> Tensor:
    """第 i 行乘以 a[i]"""
    z, a = as_tensor(z), as_tensor(a)
    if z.ndim != 2 or a.ndim != 1 or z.shape[0] != a.shape[0]:
        raise ShapeError(f"scale_rows 维度不匹配: {z.shape} 与 {a.shape}")
    return ScaleRows.apply(z, a)


class ConcatCols(Function):
    def forward(self, *arrays):
        self.widths = [arr.shape[1] for arr in arrays]
        return np.concatenate(arrays, axis=1)

    def backward(self, grad):
        bounds = np.cumsum([0] + self.widths)
        return tuple(grad[:, bounds[i]:bounds[i + 1]] for i in range(len(self.widths)))


def concat_cols(*tensors: Tensor) -> Tensor:
    """按列拼接"""
    tensors = tuple(as_tensor(t) for t in tensors)
    rows = {t.shape[0] for t in tensors}
    if any(t.ndim != 2 for t in tensors) or len(rows) != 1:
        raise ShapeError(f"concat_cols 维度不匹配: {[t.shape for t in tensors]}")
    return ConcatCols.apply(*tensors)


class SliceCols(Function):
    def forward(self, x, start=0, stop=None):
        self.shape, self.start, self.stop = x.shape, start, stop
        return x[:, start:stop].copy()

    def backward(self, grad):
        out = np.zeros(self.shape)
        out[:, self.start:self.stop] = grad
        return (out,)


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    if x.ndim != 2 or not 0 <= start < stop <= x.shape[1]:
        raise ShapeError(f"slice_cols 越界: 形状 {x.shape}, 区间 [{start}, {stop})")
    return SliceCols.apply(x, start=start, stop=stop)


class Dropout(Function):
    def forward(self, x, mask=None):
        self.mask = mask
        return x * mask

    def backward(self, grad):
        return (grad * self.mask,)


def dropout(x: Tensor, p: float, seed: Optional[int] = None,
            rng: Optional[np.random.Generator] = None, training: bool = True) -> Tensor:
    """
    以概率 p 置零并把保留项放大 1/(1-p)

    参数:
        p: 丢弃概率，取值 [0, 1)
        seed / rng: 随机源，二选一；相同种子得到相同掩码
        training: False 时为恒等映射
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout 概率必须在 [0, 1) 内，当前为 {p}")
    x = as_tensor(x)
    if not training or p == 0.0:
        return x
    if rng is None:
        rng = np.random.default_rng(seed)
    keep = rng.random(x.shape) >= p
    return Dropout.apply(x, mask=keep / (1.0 - p))


class SoftmaxRows(Function):
    def forward(self, x):
        out = x - x.max(axis=1, keepdims=True)
        np.exp(out, out=out)
        out /= out.sum(axis=1, keepdims=True)
        self.out = out
        return out

    def backward(self, grad):
        inner = (grad * self.out).sum(axis=1, keepdims=True)
        dx = grad - inner
        dx *= self.out
        return (dx,)


def softmax_rows(x: Tensor) -> Tensor:
    """按行 softmax（减去行最大值保证数值稳定）"""
    x = as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"softmax_rows 需要二维张量，当前形状 {x.shape}")
    return SoftmaxRows.apply(x)


# ==================== 索引与图运算 ====================

class TakeRows(Function):
    def forward(self, x, index=None, bijective=False):
        self.shape, self.index, self.bijective = x.shape, index, bijective
        return x[index]

    def backward(self, grad):
        out = np.zeros(self.shape)
        if self.bijective:
            out[self.index] = grad
        else:
            np.add.at(out, self.index, grad)
        return (out,)


def take_rows(x: Tensor, index: np.ndarray, bijective: bool = False) -> Tensor:
    """
    按下标取行（一维张量时取元素）

    参数:
        bijective: 下标是否为排列；为 True 时反向直接散射，不做累加
    """
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise ShapeError(f"take_rows 下标越界: 形状 {x.shape}")
    return TakeRows.apply(x, index=index, bijective=bijective)


def _segment_matrix(index: np.ndarray, num_segments: int) -> csr_array:
    m = index.shape[0]
    return csr_array((np.ones(m), (index, np.arange(m))), shape=(num_segments, m))


class SegmentSum(Function):
    def forward(self, values, index=None, num_segments=0):
        self.index = index
        return np.asarray(_segment_matrix(index, num_segments) @ values)

    def backward(self, grad):
        return (grad[self.index],)


def segment_sum(values: Tensor, index: np.ndarray, num_segments: int) -> Tensor:
    """out[s] = Σ_{e: index[e]=s} values[e]"""
    values = as_tensor(values)
    index = np.asarray(index, dtype=np.int64)
    if values.shape[0] != index.shape[0]:
        raise ShapeError(f"segment_sum 维度不匹配: {values.shape} 与下标 {index.shape}")
    return SegmentSum.apply(values, index=index, num_segments=num_segments)


class EdgeSoftmax(Function):
    def forward(self, scores, index=None, num_segments=0):
        self.index = index
        self.segments = _segment_matrix(index, num_segments)
        peak = np.full(num_segments, -np.inf)
        np.maximum.at(peak, index, scores)
        ex = np.exp(scores - peak[index])
        denom = self.segments @ ex
        self.alpha = ex / denom[index]
        return self.alpha

    def backward(self, grad):
        inner = self.segments @ (self.alpha * grad)
        return (self.alpha * (grad - inner[self.index]),)


def edge_softmax(scores: Tensor, index: np.ndarray, num_segments: int) -> Tensor:
    """对落在同一目标节点的边分数做 softmax"""
    scores = as_tensor(scores)
    index = np.asarray(index, dtype=np.int64)
    if scores.ndim != 1 or scores.shape[0] != index.shape[0]:
        raise ShapeError(f"edge_softmax 维度不匹配: {scores.shape} 与下标 {index.shape}")
    return EdgeSoftmax.apply(scores, index=index, num_segments=num_segments)


# ==================== 一维卷积 ====================

class Conv1d(Function):
    def forward(self, seq, kernel, bias):
        n = seq.shape[0]
        k = kernel.shape[0]
        pad = (k - 1) // 2
        padded = np.zeros((n + k - 1, seq.shape[1]))
        padded[pad:pad + n] = seq
        out = np.broadcast_to(bias, (n, kernel.shape[2])).copy()
        for j in range(k):
            out += padded[j:j + n] @ kernel[j]
        self.padded, self.kernel, self.n, self.pad = padded, kernel, n, pad
        return out

    def backward(self, grad):
        n, pad, kernel = self.n, self.pad, self.kernel
        d_padded = np.zeros_like(self.padded)
        d_kernel = np.empty_like(kernel)
        for j in range(kernel.shape[0]):
            d_padded[j:j + n] += grad @ kernel[j].T
            d_kernel[j] = self.padded[j:j + n].T @ grad
        return d_padded[pad:pad + n], d_kernel, grad.sum(axis=0)


def conv1d(seq: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """
    零填充、输出等长的一维卷积

    参数:
        seq: [n×f] 序列
        kernel: [k×f×g]，k 为奇数；kernel[j] 作用于相对位置 j-(k-1)/2
        bias: [g]
    """
    seq, kernel, bias = as_tensor(seq), as_tensor(kernel), as_tensor(bias)
    if kernel.ndim != 3:
        raise ShapeError(f"卷积核需要三维 [k×f×g]，当前形状 {kernel.shape}")
    if kernel.shape[0] % 2 == 0:
        raise ConfigError(f"卷积核大小必须为奇数，当前为 {kernel.shape[0]}")
    if seq.ndim != 2 or seq.shape[0] < 1 or seq.shape[1] != kernel.shape[1]:
        raise ShapeError(f"conv1d 维度不匹配: 序列 {seq.shape} 与卷积核 {kernel.shape}")
    if bias.shape != (kernel.shape[2],):
        raise ShapeError(f"conv1d 偏置形状 {bias.shape} 与卷积核 {kernel.shape} 不匹配")
    return Conv1d.apply(seq, kernel, bias)


# ==================== 损失 ====================

class SoftmaxCrossEntropy(Function):
    def forward(self, logits, labels=None, nodes=None):
        picked = logits[nodes]
        shifted = picked - picked.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        rows = np.arange(nodes.shape[0])
        self.probs = np.exp(shifted - log_z[:, None])
        self.shape, self.labels, self.nodes = logits.shape, labels, nodes
        return np.asarray(np.mean(log_z - shifted[rows, labels]))

    def backward(self, grad):
        m = self.nodes.shape[0]
        local = self.probs.copy()
        local[np.arange(m), self.labels] -= 1.0
        out = np.zeros(self.shape)
        np.add.at(out, self.nodes, local * (float(grad) / m))
        return (out,)


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray,
                          mask: Union[np.ndarray, None]) -> Tensor:
    """
    掩码节点上的平均负对数 softmax

    参数:
        logits: [n×C]
        labels: 长度 n 的类别数组（全体节点）
        mask: 参与计算的节点下标，或长度 n 的布尔掩码
    """
    logits = as_tensor(logits)
    if logits.ndim != 2:
        raise ShapeError(f"logits 需要二维 [n×C]，当前形状 {logits.shape}")
    mask = np.asarray(mask)
    if mask.dtype == np.bool_:
        if mask.shape != (logits.shape[0],):
            raise ShapeError(f"布尔掩码长度需为 {logits.shape[0]}，当前形状 {mask.shape}")
        nodes = np.flatnonzero(mask)
    elif mask.size and not np.issubdtype(mask.dtype, np.integer):
        raise ContractError(f"掩码必须是整数下标或布尔数组，当前类型 {mask.dtype}")
    else:
        nodes = mask.astype(np.int64).reshape(-1)
    if nodes.size == 0:
        raise ContractError("掩码为空，平均损失无定义")
    picked = np.asarray(labels, dtype=np.int64)[nodes]
    num_classes = logits.shape[1]
    if picked.min() < 0 or picked.max() >= num_classes:
        raise ContractError(f"标签超出范围 [0, {num_classes})")
    return SoftmaxCrossEntropy.apply(logits, labels=picked, nodes=nodes)
