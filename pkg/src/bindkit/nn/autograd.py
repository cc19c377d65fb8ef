"""Reverse-mode automatic differentiation over dense numpy arrays.

A Tensor wraps an ndarray and, while gradient recording is enabled, remembers
the operation that produced it. ``backward(loss)`` walks the recorded graph
once in reverse topological order, accumulates gradients into every reachable
leaf with ``requires_grad=True``, and frees the tape.

Training runs in float32 by default; tests switch to float64 via
``set_default_dtype`` / ``using_dtype`` for finite-difference verification.
"""

from __future__ import annotations

import contextlib

import numpy as np

_DEFAULT_DTYPE = np.dtype(np.float32)
_GRAD_ENABLED = True

# Additive mask value: large enough to dominate activations, small enough to
# stay finite in float32 arithmetic.
NEG_INF = 1e9


class ShapeMismatch(ValueError):
    """Operand shapes are incompatible; the message carries both shapes."""


class NotScalar(ValueError):
    """backward() was called on a non-scalar tensor."""


class DisconnectedGraph(ValueError):
    """backward() was called on a tensor with no tracked ancestors."""


def default_dtype() -> np.dtype:
    return _DEFAULT_DTYPE


def set_default_dtype(dtype) -> None:
    global _DEFAULT_DTYPE
    _DEFAULT_DTYPE = np.dtype(dtype)


@contextlib.contextmanager
def using_dtype(dtype):
    """Temporarily switch the dtype new tensors are created with."""
    global _DEFAULT_DTYPE
    prev = _DEFAULT_DTYPE
    _DEFAULT_DTYPE = np.dtype(dtype)
    try:
        yield
    finally:
        _DEFAULT_DTYPE = prev


@contextlib.contextmanager
def no_grad():
    """Disable tape recording (inference mode)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if arr.dtype != _DEFAULT_DTYPE:
            arr = arr.astype(_DEFAULT_DTYPE)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @classmethod
    def _node(cls, data, parents, backward):
        t = cls.__new__(cls)
        t.data = data
        t.grad = None
        t.requires_grad = True
        t._parents = parents
        t._backward = backward
        return t

    # -- introspection -------------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        t = Tensor.__new__(Tensor)
        t.data = self.data
        t.grad = None
        t.requires_grad = False
        t._parents = ()
        t._backward = None
        return t

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- operators -----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def max(self, axis=None, keepdims=False):
        return tmax(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes if axes else None)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _tracking(*tensors) -> bool:
    return _GRAD_ENABLED and any(t.requires_grad for t in tensors)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient over the axes numpy broadcasting expanded."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# -- arithmetic ---------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data
    if not _tracking(a, b):
        return Tensor(out)

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Tensor._node(out, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data
    if not _tracking(a, b):
        return Tensor(out)

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return Tensor._node(out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data
    if not _tracking(a, b):
        return Tensor(out)

    def backward(g):
        return (_unbroadcast(g * b.data, a.data.shape),
                _unbroadcast(g * a.data, b.data.shape))

    return Tensor._node(out, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    if not _tracking(a, b):
        return Tensor(out)

    def backward(g):
        ga = g / b.data
        gb = -g * a.data / (b.data * b.data)
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return Tensor._node(out, (a, b), backward)


def power(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    out = a.data ** exponent
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g * exponent * a.data ** (exponent - 1),)

    return Tensor._node(out, (a,), backward)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape[-1] != b.data.shape[-2 if b.data.ndim > 1 else 0]:
        raise ShapeMismatch(f"matmul: {a.data.shape} @ {b.data.shape}")
    out = a.data @ b.data
    if not _tracking(a, b):
        return Tensor(out)

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return Tensor._node(out, (a, b), backward)


# -- elementwise nonlinearities ------------------------------------------

def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g * (a.data > 0),)

    return Tensor._node(out, (a,), backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g * out,)

    return Tensor._node(out, (a,), backward)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = np.log(a.data)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g / a.data,)

    return Tensor._node(out, (a,), backward)


def log1p(a) -> Tensor:
    a = as_tensor(a)
    out = np.log1p(a.data)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g / (1.0 + a.data),)

    return Tensor._node(out, (a,), backward)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    # Stable in both tails.
    out = np.where(a.data >= 0,
                   1.0 / (1.0 + np.exp(-np.abs(a.data))),
                   np.exp(-np.abs(a.data)) / (1.0 + np.exp(-np.abs(a.data))))
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g * out * (1.0 - out),)

    return Tensor._node(out, (a,), backward)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (g * (1.0 - out * out),)

    return Tensor._node(out, (a,), backward)


def sqrt(a) -> Tensor:
    return power(a, 0.5)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values to [lo, hi]; the gradient passes through inside the bounds
    and is zero outside."""
    a = as_tensor(a)
    out = np.clip(a.data, lo, hi)
    if not _tracking(a):
        return Tensor(out)
    inside = (a.data > lo) & (a.data < hi)

    def backward(g):
        return (g * inside,)

    return Tensor._node(out, (a,), backward)


# -- reductions ----------------------------------------------------------

def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        gg = np.asarray(g)
        if axis is not None and not keepdims:
            gg = np.expand_dims(gg, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return Tensor._node(np.asarray(out), (a,), backward)


def tmean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        n = a.data.size
    elif isinstance(axis, tuple):
        n = int(np.prod([a.data.shape[i] for i in axis]))
    else:
        n = a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def tmax(a, axis=None, keepdims=False) -> Tensor:
    """Max reduction; the gradient routes to the first maximal position."""
    a = as_tensor(a)
    if axis is None:
        out = np.asarray(a.data.max())
        if not _tracking(a):
            return Tensor(out)
        flat = int(np.argmax(a.data))

        def backward(g):
            z = np.zeros_like(a.data)
            z.flat[flat] = np.asarray(g).reshape(())
            return (z,)

        return Tensor._node(out, (a,), backward)

    m = a.data.max(axis=axis, keepdims=True)
    hit = a.data == m
    first = np.cumsum(hit, axis=axis) == 1
    route = hit & first
    out = m if keepdims else np.squeeze(m, axis=axis)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        gg = np.asarray(g)
        if not keepdims:
            gg = np.expand_dims(gg, axis)
        return (route * gg,)

    return Tensor._node(out, (a,), backward)


# -- shape manipulation ----------------------------------------------------

def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (np.asarray(g).reshape(a.data.shape),)

    return Tensor._node(out, (a,), backward)


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    out = a.data.transpose(axes)
    if not _tracking(a):
        return Tensor(out)
    inv = None if axes is None else tuple(np.argsort(axes))

    def backward(g):
        return (np.asarray(g).transpose(inv),)

    return Tensor._node(out, (a,), backward)


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = as_tensor(a)
    out = np.swapaxes(a.data, ax1, ax2)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (np.swapaxes(np.asarray(g), ax1, ax2),)

    return Tensor._node(out, (a,), backward)


def take(a, key) -> Tensor:
    """Basic/advanced indexing; gradient scatter-adds into the source."""
    a = as_tensor(a)
    out = a.data[key]
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        z = np.zeros_like(a.data)
        np.add.at(z, key, g)
        return (z,)

    return Tensor._node(out, (a,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    if not _tracking(*tensors):
        return Tensor(out)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(np.asarray(g), splits, axis=axis))

    return Tensor._node(out, tuple(tensors), backward)


# -- gather / scatter ------------------------------------------------------

def gather_rows(a, idx) -> Tensor:
    """Rows of `a` at integer index array `idx` (any shape)."""
    a = as_tensor(a)
    idx = np.asarray(idx)
    out = a.data[idx]
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        z = np.zeros_like(a.data)
        np.add.at(z, idx, g)
        return (z,)

    return Tensor._node(out, (a,), backward)


def segment_sum(a, segment_ids, num_segments: int) -> Tensor:
    """Sum rows of `a` into `num_segments` buckets given per-row ids."""
    a = as_tensor(a)
    seg = np.asarray(segment_ids)
    out = np.zeros((num_segments,) + a.data.shape[1:], dtype=a.data.dtype)
    np.add.at(out, seg, a.data)
    if not _tracking(a):
        return Tensor(out)

    def backward(g):
        return (np.asarray(g)[seg],)

    return Tensor._node(out, (a,), backward)


# -- convolution -------------------------------------------------------------

def conv1d(x, w, b=None) -> Tensor:
    """Valid-padding stride-1 1D convolution.

    x: (batch, in_channels, length); w: (out_channels, in_channels, k);
    b: (out_channels,) or None. Output: (batch, out_channels, length-k+1).
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 3 or w.data.ndim != 3:
        raise ShapeMismatch(f"conv1d: x {x.data.shape}, w {w.data.shape}")
    bsz, cin, length = x.data.shape
    cout, cin_w, k = w.data.shape
    if cin != cin_w or length < k:
        raise ShapeMismatch(f"conv1d: x {x.data.shape} incompatible with w {w.data.shape}")
    windows = np.lib.stride_tricks.sliding_window_view(x.data, k, axis=2)  # (B,Cin,Lout,K)
    out = np.einsum("bclk,ock->bol", windows, w.data, optimize=True)
    parents = [x, w]
    if b is not None:
        b = as_tensor(b)
        out = out + b.data[None, :, None]
        parents.append(b)
    if not _tracking(*parents):
        return Tensor(out)
    lout = length - k + 1

    def backward(g):
        g = np.asarray(g)
        gw = np.einsum("bol,bclk->ock", g, windows, optimize=True)
        gx_cols = np.einsum("bol,ock->bclk", g, w.data, optimize=True)
        gx = np.zeros_like(x.data)
        for j in range(k):
            gx[:, :, j:j + lout] += gx_cols[:, :, :, j]
        grads = [gx, gw]
        if b is not None:
            grads.append(g.sum(axis=(0, 2)))
        return tuple(grads)

    return Tensor._node(out, tuple(parents), backward)


# -- composites ---------------------------------------------------------------

def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shift = Tensor(a.data.max(axis=axis, keepdims=True))  # constant; softmax is shift-invariant
    e = exp(sub(a, shift))
    return div(e, tsum(e, axis=axis, keepdims=True))


def softplus(a) -> Tensor:
    """log(1 + e^a), computed stably as relu(a) + log1p(e^-|a|)."""
    a = as_tensor(a)
    neg_abs = mul(relu(a), -2.0) + a  # a - 2*relu(a) == -|a|
    return add(relu(a), log1p(exp(neg_abs)))


# -- the backward engine --------------------------------------------------------

def _topo_order(root: Tensor):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate .grad on every tracked leaf reachable from `loss`; free the tape."""
    if loss.data.size != 1:
        raise NotScalar(f"backward needs a scalar loss, got shape {loss.data.shape}")
    if not loss.requires_grad:
        raise DisconnectedGraph("loss does not depend on any tracked tensor")
    order = _topo_order(loss)
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._parents:
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                acc = grads.get(id(parent))
                grads[id(parent)] = pg if acc is None else acc + pg
        elif node.requires_grad:
            node.grad = g if node.grad is None else node.grad + g
    for node in order:
        node._parents = ()
        node._backward = None
