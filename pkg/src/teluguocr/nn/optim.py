"""SGD+momentum and Adam parameter updates (in place)."""

from __future__ import annotations

import numpy as np


def sgd_momentum_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: dict,
    lr: float,
    momentum: float,
) -> dict:
    """v <- momentum*v + g;  p <- p - lr*v."""
    if "v" not in state:
        state["v"] = [np.zeros_like(p) for p in params]
    for p, g, v in zip(params, grads, state["v"]):
        v *= momentum
        v += g
        p -= lr * v
    return state


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: dict,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
    t: int,
) -> dict:
    """Bias-corrected Adam update at step t >= 1."""
    if t < 1:
        raise ValueError(f"Adam step index must be >= 1, got {t}")
    if "m" not in state:
        state["m"] = [np.zeros_like(p) for p in params]
        state["v"] = [np.zeros_like(p) for p in params]
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p, g, m, v in zip(params, grads, state["m"], state["v"]):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


class SGDMomentum:
    def __init__(self, lr: float = 1e-2, momentum: float = 0.9):
        self.lr = lr
        self.momentum = momentum
        self.state: dict = {}

    def step(self, params, grads):
        sgd_momentum_step(params, grads, self.state, self.lr, self.momentum)


class Adam:
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.state: dict = {}

    def step(self, params, grads):
        self.t += 1
        adam_step(params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps, self.t)
