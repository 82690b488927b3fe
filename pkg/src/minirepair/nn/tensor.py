"""Minimal reverse-mode automatic differentiation over numpy arrays.

Everything the models need and nothing more: 2-D row-major tensors (vectors
are (1, d) rows, biases (1, d)), scalar losses with shape (), closures for the
backward rules and a topological-order backward pass.  Training runs in
float32; gradient checking switches the whole graph to float64 by constructing
tensors with dtype=np.float64.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class ShapeMismatch(Exception):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data, dtype=dtype if dtype is not None else None)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32 if dtype is None else dtype)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False, dtype=self.data.dtype)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = grad.astype(self.data.dtype, copy=True)
        else:
            self.grad = self.grad + grad

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        if self.data.shape != ():
            raise ShapeMismatch("backward() starts from a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones((), dtype=self.data.dtype)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"


def _result(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data, dtype=data.dtype)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = any(p.requires_grad for p in parents)
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _bias_like(b: Tensor, a: Tensor) -> bool:
    return (b.data.ndim == 2 and b.data.shape[0] == 1
            and a.data.ndim == 2 and a.data.shape[1] == b.data.shape[1])


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape and not _bias_like(b, a):
        raise ShapeMismatch(f"add {a.shape} vs {b.shape}")
    data = a.data + b.data

    def backward(grad):
        a._accumulate(grad)
        if b.shape == a.shape:
            b._accumulate(grad)
        else:
            b._accumulate(grad.sum(axis=0, keepdims=True))

    return _result(data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(f"sub {a.shape} vs {b.shape}")
    data = a.data - b.data

    def backward(grad):
        a._accumulate(grad)
        b._accumulate(-grad)

    return _result(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (Hadamard) product of same-shape tensors."""
    if a.shape != b.shape:
        raise ShapeMismatch(f"mul {a.shape} vs {b.shape}")
    data = a.data * b.data

    def backward(grad):
        a._accumulate(grad * b.data)
        b._accumulate(grad * a.data)

    return _result(data, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    data = a.data * a.data.dtype.type(factor)

    def backward(grad):
        a._accumulate(grad * a.data.dtype.type(factor))

    return _result(data, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul {a.shape} vs {b.shape}")
    data = a.data @ b.data

    def backward(grad):
        a._accumulate(grad @ b.data.T)
        b._accumulate(a.data.T @ grad)

    return _result(data, (a, b), backward)


def concat(parts: Sequence[Tensor], axis: int = 1) -> Tensor:
    if not parts:
        raise ShapeMismatch("concat of nothing")
    data = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]

    def backward(grad):
        offset = 0
        for p, size in zip(parts, sizes):
            index = [slice(None)] * grad.ndim
            index[axis] = slice(offset, offset + size)
            p._accumulate(grad[tuple(index)])
            offset += size

    return _result(data, tuple(parts), backward)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeMismatch(f"transpose needs 2-D, got {a.shape}")
    data = a.data.T.copy()

    def backward(grad):
        a._accumulate(grad.T)

    return _result(data, (a,), backward)


def slice_cols(a: Tensor, start: int, end: int) -> Tensor:
    if a.data.ndim != 2 or not (0 <= start < end <= a.shape[1]):
        raise ShapeMismatch(f"slice_cols [{start}:{end}] of {a.shape}")
    data = a.data[:, start:end].copy()

    def backward(grad):
        full = np.zeros(a.shape, dtype=a.data.dtype)
        full[:, start:end] = grad
        a._accumulate(full)

    return _result(data, (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(grad):
        a._accumulate(grad * data * (1.0 - data))

    return _result(data, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    data = np.tanh(a.data)

    def backward(grad):
        a._accumulate(grad * (1.0 - data * data))

    return _result(data, (a,), backward)


def softmax(a: Tensor) -> Tensor:
    """Row softmax over the last axis; rows sum to one."""
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    data = exp / exp.sum(axis=-1, keepdims=True)

    def backward(grad):
        dot = (grad * data).sum(axis=-1, keepdims=True)
        a._accumulate(data * (grad - dot))

    return _result(data, (a,), backward)


def log_t(a: Tensor, eps: float = 1e-7) -> Tensor:
    clipped = np.clip(a.data, eps, None)
    data = np.log(clipped)

    def backward(grad):
        inside = a.data > eps
        a._accumulate(np.where(inside, grad / clipped, 0.0).astype(a.data.dtype))

    return _result(data, (a,), backward)


def abs_t(a: Tensor) -> Tensor:
    data = np.abs(a.data)

    def backward(grad):
        a._accumulate(grad * np.sign(a.data))

    return _result(data, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    data = a.data.sum()

    def backward(grad):
        a._accumulate(np.full(a.shape, grad, dtype=a.data.dtype))

    return _result(np.asarray(data, dtype=a.data.dtype), (a,), backward)


def mean_all(a: Tensor) -> Tensor:
    count = a.data.size
    data = a.data.mean()

    def backward(grad):
        a._accumulate(np.full(a.shape, grad / count, dtype=a.data.dtype))

    return _result(np.asarray(data, dtype=a.data.dtype), (a,), backward)


def mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error over all elements; scalar output."""
    if pred.shape != target.shape:
        raise ShapeMismatch(f"mse {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    count = diff.size
    data = np.asarray((diff * diff).mean(), dtype=pred.data.dtype)

    def backward(grad):
        g = grad * 2.0 * diff / count
        pred._accumulate(g)
        target._accumulate(-g)

    return _result(data, (pred, target), backward)


def bce(pred: Tensor, target: Tensor, eps: float = 1e-7) -> Tensor:
    """Binary cross entropy; pred must lie in (0, 1), targets in [0, 1].

    eps only guards against saturated float32 sigmoids; gradient checks use
    interior points where the clip is inactive.
    """
    if pred.shape != target.shape:
        raise ShapeMismatch(f"bce {pred.shape} vs {target.shape}")
    p = np.clip(pred.data, eps, 1.0 - eps)
    t = target.data
    count = p.size
    data = np.asarray(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).mean(),
                      dtype=pred.data.dtype)

    def backward(grad):
        inside = (pred.data > eps) & (pred.data < 1.0 - eps)
        g = grad * (p - t) / (p * (1.0 - p) * count)
        pred._accumulate(np.where(inside, g, 0.0).astype(pred.data.dtype))
        target._accumulate(grad * (np.log(1.0 - p) - np.log(p)) / count)

    return _result(data, (pred, target), backward)


def sum_children(parts: Sequence[Tensor]) -> Tensor:
    """Elementwise sum of any number of same-shape tensors (h-tilde of the
    child-sum recurrence).  An empty sequence is a shape error; leaves pass a
    zero tensor explicitly."""
    if not parts:
        raise ShapeMismatch("sum_children of nothing")
    shape = parts[0].shape
    for p in parts:
        if p.shape != shape:
            raise ShapeMismatch(f"sum_children {shape} vs {p.shape}")
    data = parts[0].data.copy()
    for p in parts[1:]:
        data = data + p.data

    def backward(grad):
        for p in parts:
            p._accumulate(grad)

    return _result(data, tuple(parts), backward)


def zeros(shape, dtype=np.float32) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype))


def parameter(shape, rng: np.random.Generator, scale_factor: float | None = None,
              dtype=np.float32) -> Tensor:
    """Uniform init in [-s, s] with s = 1/sqrt(fan_in) unless given."""
    fan_in = shape[0] if len(shape) == 2 else shape[-1]
    s = scale_factor if scale_factor is not None else 1.0 / np.sqrt(max(fan_in, 1))
    data = rng.uniform(-s, s, size=shape).astype(dtype)
    t = Tensor(data, requires_grad=True, dtype=dtype)
    return t


def finite(t: Tensor) -> bool:
    return bool(np.isfinite(t.data).all())
