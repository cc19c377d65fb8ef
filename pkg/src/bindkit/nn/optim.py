"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from .autograd import ShapeMismatch, Tensor


def init_adam_state(params: list[np.ndarray]) -> dict:
    return {
        "step": 0,
        "m": [np.zeros_like(p) for p in params],
        "v": [np.zeros_like(p) for p in params],
    }


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: dict,
              lr: float = 1e-4, betas: tuple[float, float] = (0.9, 0.999),
              eps: float = 1e-8) -> None:
    """One in-place Adam update. First call must pass state from init_adam_state."""
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} params vs {len(grads)} grads")
    b1, b2 = betas
    state["step"] += 1
    t = state["step"]
    bias1 = 1.0 - b1 ** t
    bias2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, grads, state["m"], state["v"]):
        if p.shape != g.shape:
            raise ShapeMismatch(f"param {p.shape} vs grad {g.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    """Object wrapper tying adam_step to a parameter list's .grad fields."""

    def __init__(self, params: list[Tensor], lr: float = 1e-4,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = init_adam_state([p.data for p in self.params])

    def step(self) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        adam_step([p.data for p in self.params], grads, self.state,
                  lr=self.lr, betas=self.betas, eps=self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
