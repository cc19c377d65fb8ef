"""Central finite-difference verification of backward passes.

Kept independent of the tape internals: the reference derivative is computed
purely by re-evaluating the forward function at shifted inputs.
"""

from __future__ import annotations

import numpy as np

from .autograd import Tensor, backward


def finite_difference(f, leaf: Tensor, index: tuple, h: float = 1e-5) -> float:
    """d f() / d leaf[index] by central differences; f must be re-runnable."""
    original = leaf.data[index]
    leaf.data[index] = original + h
    up = f().item()
    leaf.data[index] = original - h
    down = f().item()
    leaf.data[index] = original
    return (up - down) / (2.0 * h)


def max_relative_error(f, leaves: list[Tensor], coords_per_leaf: int = 4,
                       h: float = 1e-5, rng: np.random.Generator | None = None) -> float:
    """Compare tape gradients of scalar f() against finite differences.

    Checks up to coords_per_leaf randomly chosen coordinates per leaf and
    returns the worst relative error, |analytic - numeric| / max(1, |numeric|).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    for leaf in leaves:
        leaf.zero_grad()
    loss = f()
    backward(loss)
    worst = 0.0
    for leaf in leaves:
        assert leaf.grad is not None, "leaf did not receive a gradient"
        n = leaf.data.size
        picks = range(n) if n <= coords_per_leaf else rng.choice(n, coords_per_leaf, replace=False)
        for flat in picks:
            index = np.unravel_index(int(flat), leaf.data.shape)
            numeric = finite_difference(f, leaf, index, h=h)
            analytic = float(leaf.grad[index])
            err = abs(analytic - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
    return worst
