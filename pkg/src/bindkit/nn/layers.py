"""Neural network layers built on the autograd tape.

Every layer is a Module: parameters are discovered by walking attributes in
sorted order, which makes parameter naming deterministic across runs (the
persistence format relies on this).
"""

from __future__ import annotations

import math

import numpy as np

from . import autograd as ag
from .autograd import ShapeMismatch, Tensor


class Module:
    def __init__(self):
        self.training = True

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name in sorted(vars(self)):
            value = getattr(self, name)
            key = f"{prefix}.{name}" if prefix else name
            if isinstance(value, Tensor) and value.requires_grad:
                out[key] = value
            elif isinstance(value, Module):
                out.update(value.named_parameters(key))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{key}.{i}"))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out[f"{key}.{i}"] = item
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def train(self, mode: bool = True):
        self.training = mode
        for value in vars(self).values():
            if isinstance(value, Module):
                value.train(mode)
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        item.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, bias: bool = True):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.w = Tensor(_glorot(rng, (in_dim, out_dim), in_dim, out_dim), requires_grad=True)
        self.b = Tensor(np.zeros(out_dim), requires_grad=True) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeMismatch(f"Dense expects (..., {self.in_dim}), got {x.shape}")
        y = ag.matmul(x, self.w)
        return y if self.b is None else ag.add(y, self.b)


class Embedding(Module):
    def __init__(self, num_embeddings: int, dim: int, rng: np.random.Generator):
        super().__init__()
        self.num_embeddings = num_embeddings
        self.dim = dim
        self.w = Tensor(rng.normal(0.0, 0.02, size=(num_embeddings, dim)), requires_grad=True)

    def forward(self, ids: np.ndarray) -> Tensor:
        ids = np.asarray(ids)
        if ids.size and (ids.min() < 0 or ids.max() >= self.num_embeddings):
            raise ShapeMismatch(
                f"Embedding ids out of range [0, {self.num_embeddings}); got {ids.min()}..{ids.max()}")
        return ag.gather_rows(self.w, ids)


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return ag.relu(x)


class Dropout(Module):
    """Inverted dropout; identity in eval mode. Mask randomness comes from the
    layer's own generator so fixed construction seeds give fixed training runs."""

    def __init__(self, p: float, rng: np.random.Generator | None = None):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout p must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = 1.0 - self.p
        mask = (self.rng.random(x.shape) < keep).astype(x.data.dtype) / keep
        return ag.mul(x, Tensor(mask))


class Conv1D(Module):
    """Stride-1, valid-padding convolution over (batch, channels, length)."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, rng: np.random.Generator):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        fan_in, fan_out = in_channels * kernel, out_channels * kernel
        self.w = Tensor(_glorot(rng, (out_channels, in_channels, kernel), fan_in, fan_out),
                        requires_grad=True)
        self.b = Tensor(np.zeros(out_channels), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return ag.conv1d(x, self.w, self.b)

    def out_length(self, length: int) -> int:
        return length - self.kernel + 1


class GlobalMaxPool1D(Module):
    """Per-channel max over the trailing (time) axis.

    With `lengths`, positions at or past each sample's length are excluded so
    zero-padding cannot leak into the pooled value.
    """

    def forward(self, x: Tensor, lengths: np.ndarray | None = None) -> Tensor:
        if lengths is not None:
            t = x.shape[-1]
            mask = np.arange(t)[None, :] < np.asarray(lengths)[:, None]  # (B, T)
            penalty = (1.0 - mask.astype(x.data.dtype)) * ag.NEG_INF
            x = ag.sub(x, Tensor(penalty[:, None, :]))
        return ag.tmax(x, axis=-1)


class GRUCell(Module):
    # Recurrent weights use the same uniform fan-based init as Dense; no
    # orthogonal init is attempted.
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.hidden = hidden
        self.wx = Dense(in_dim, 3 * hidden, rng)
        self.wh = Dense(hidden, 3 * hidden, rng, bias=False)

    def forward(self, x: Tensor, h: Tensor) -> Tensor:
        n = self.hidden
        gx = self.wx(x)
        gh = self.wh(h)
        z = ag.sigmoid(gx[:, :n] + gh[:, :n])
        r = ag.sigmoid(gx[:, n:2 * n] + gh[:, n:2 * n])
        cand = ag.tanh(gx[:, 2 * n:] + r * gh[:, 2 * n:])
        return (1.0 - z) * cand + z * h


class LSTMCell(Module):
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.hidden = hidden
        self.wx = Dense(in_dim, 4 * hidden, rng)
        self.wh = Dense(hidden, 4 * hidden, rng, bias=False)

    def forward(self, x: Tensor, state: tuple[Tensor, Tensor]) -> tuple[Tensor, Tensor]:
        h, c = state
        n = self.hidden
        gates = self.wx(x) + self.wh(h)
        i = ag.sigmoid(gates[:, :n])
        f = ag.sigmoid(gates[:, n:2 * n])
        g = ag.tanh(gates[:, 2 * n:3 * n])
        o = ag.sigmoid(gates[:, 3 * n:])
        c_new = f * c + i * g
        h_new = o * ag.tanh(c_new)
        return h_new, c_new


class BiRNN(Module):
    """Bidirectional recurrent encoder; output concatenates the final forward
    and backward states. Masked steps carry state through unchanged, so padded
    tails do not alter the result."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, cell: str = "gru"):
        super().__init__()
        if cell not in ("gru", "lstm"):
            raise ValueError(f"unknown rnn cell {cell!r}")
        self.cell_kind = cell
        self.hidden = hidden
        cell_cls = GRUCell if cell == "gru" else LSTMCell
        self.fwd = cell_cls(in_dim, hidden, rng)
        self.bwd = cell_cls(in_dim, hidden, rng)

    def _run(self, cell: Module, x: Tensor, mask: np.ndarray, order) -> Tensor:
        bsz = x.shape[0]
        dtype = x.data.dtype
        h = Tensor(np.zeros((bsz, self.hidden), dtype=dtype))
        c = Tensor(np.zeros((bsz, self.hidden), dtype=dtype))
        for t in order:
            xt = x[:, t, :]
            m = Tensor(mask[:, t:t + 1].astype(dtype))
            if self.cell_kind == "gru":
                h_new = cell(xt, h)
                h = h_new * m + h * (1.0 - m)
            else:
                h_new, c_new = cell(xt, (h, c))
                h = h_new * m + h * (1.0 - m)
                c = c_new * m + c * (1.0 - m)
        return h

    def forward(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        bsz, steps, _ = x.shape
        if mask is None:
            mask = np.ones((bsz, steps), dtype=bool)
        mask = np.asarray(mask)
        h_fwd = self._run(self.fwd, x, mask, range(steps))
        h_bwd = self._run(self.bwd, x, mask, range(steps - 1, -1, -1))
        return ag.concat([h_fwd, h_bwd], axis=1)


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        self.dim = dim
        self.eps = eps
        self.gamma = Tensor(np.ones(dim), requires_grad=True)
        self.beta = Tensor(np.zeros(dim), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        mu = ag.tmean(x, axis=-1, keepdims=True)
        centered = x - mu
        var = ag.tmean(centered * centered, axis=-1, keepdims=True)
        normed = centered / ag.sqrt(var + self.eps)
        return normed * self.gamma + self.beta


class MultiHeadSelfAttention(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        super().__init__()
        if dim % heads:
            raise ValueError(f"model dim {dim} not divisible by {heads} heads")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.wq = Dense(dim, dim, rng)
        self.wk = Dense(dim, dim, rng)
        self.wv = Dense(dim, dim, rng)
        self.wo = Dense(dim, dim, rng)

    def forward(self, x: Tensor, mask: np.ndarray) -> Tensor:
        bsz, steps, _ = x.shape

        def split_heads(t: Tensor) -> Tensor:
            return ag.transpose(ag.reshape(t, (bsz, steps, self.heads, self.head_dim)),
                                (0, 2, 1, 3))

        q = split_heads(self.wq(x))
        k = split_heads(self.wk(x))
        v = split_heads(self.wv(x))
        scores = ag.matmul(q, ag.transpose(k, (0, 1, 3, 2))) * (1.0 / math.sqrt(self.head_dim))
        key_mask = np.asarray(mask, dtype=x.data.dtype)[:, None, None, :]
        scores = scores - Tensor((1.0 - key_mask) * ag.NEG_INF)
        attn = ag.softmax(scores, axis=-1)
        mixed = ag.matmul(attn, v)
        merged = ag.reshape(ag.transpose(mixed, (0, 2, 1, 3)), (bsz, steps, self.dim))
        return self.wo(merged)


class TransformerBlock(Module):
    """Post-norm encoder block: self-attention and position-wise feed-forward,
    each wrapped in residual + layer norm; keys at padded positions are masked."""

    def __init__(self, dim: int, heads: int, ff_dim: int, rng: np.random.Generator,
                 dropout: float = 0.0):
        super().__init__()
        self.attn = MultiHeadSelfAttention(dim, heads, rng)
        self.ln1 = LayerNorm(dim)
        self.ln2 = LayerNorm(dim)
        self.ff1 = Dense(dim, ff_dim, rng)
        self.ff2 = Dense(ff_dim, dim, rng)
        self.drop = Dropout(dropout, np.random.default_rng(int(rng.integers(2 ** 63))))

    def forward(self, x: Tensor, mask: np.ndarray) -> Tensor:
        x = self.ln1(x + self.drop(self.attn(x, mask)))
        ff = self.ff2(ag.relu(self.ff1(x)))
        return self.ln2(x + self.drop(ff))


class MPNNStep(Module):
    """One round of edge-conditioned message passing.

    Messages are A(e_uv) @ h_u summed over incoming edges; the node state is
    then updated with a GRU cell. Edges are directed (each molecular bond
    contributes both directions).
    """

    def __init__(self, hidden: int, edge_dim: int, rng: np.random.Generator):
        super().__init__()
        self.hidden = hidden
        self.edge_net = Dense(edge_dim, hidden * hidden, rng)
        self.cell = GRUCell(hidden, hidden, rng)

    def forward(self, h: Tensor, edge_feats: Tensor, src: np.ndarray, dst: np.ndarray) -> Tensor:
        n, d = h.shape
        if len(src) == 0:
            messages = Tensor(np.zeros((n, d), dtype=h.data.dtype))
        else:
            mats = ag.reshape(self.edge_net(edge_feats), (len(src), d, d))
            h_src = ag.reshape(ag.gather_rows(h, np.asarray(src)), (len(src), d, 1))
            per_edge = ag.reshape(ag.matmul(mats, h_src), (len(src), d))
            messages = ag.segment_sum(per_edge, np.asarray(dst), n)
        return self.cell(messages, h)


class Readout(Module):
    """Aggregate node states into one vector per graph (mean or sum)."""

    def __init__(self, mode: str = "mean"):
        super().__init__()
        if mode not in ("mean", "sum"):
            raise ValueError(f"readout mode must be mean or sum, got {mode!r}")
        self.mode = mode

    def forward(self, h: Tensor, graph_ids: np.ndarray, num_graphs: int) -> Tensor:
        total = ag.segment_sum(h, graph_ids, num_graphs)
        if self.mode == "sum":
            return total
        counts = np.bincount(np.asarray(graph_ids), minlength=num_graphs).astype(h.data.dtype)
        counts = np.maximum(counts, 1.0)
        return total * Tensor(1.0 / counts[:, None])


class Sequential(Module):
    def __init__(self, layers: list[Module]):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer(x)
        return x
