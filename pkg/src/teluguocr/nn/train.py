"""Training loop with early stopping on validation accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from .network import Network, evaluate
from .optim import Adam, SGDMomentum


@dataclass
class TrainConfig:
    batch_size: int = 500
    optimizer: str = "adam"  # or "sgd_momentum"
    lr: float | None = None  # default: 1e-3 adam, 1e-2 sgd
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ParameterError(f"batch size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ParameterError(f"patience must be >= 1, got {self.patience}")
        if self.optimizer not in ("adam", "sgd_momentum"):
            raise ParameterError(f"unknown optimizer {self.optimizer!r}")

    def make_optimizer(self):
        if self.optimizer == "adam":
            return Adam(self.lr or 1e-3, self.beta1, self.beta2, self.eps)
        return SGDMomentum(self.lr or 1e-2, self.momentum)


def train(
    net: Network,
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    config: TrainConfig,
    evaluator=None,
    log=None,
) -> tuple[list[np.ndarray], list[dict]]:
    """Seeded epoch loop; keeps the best-so-far params by val accuracy and
    stops after `patience` consecutive epochs without improvement.

    Returns (best params, per-epoch history); the network is left holding
    the best params.  `evaluator(net, x, y) -> accuracy` can be injected
    for testing.
    """
    if len(train_x) == 0 or len(val_x) == 0:
        raise ParameterError("train and validation sets must be nonempty")
    evaluator = evaluator or evaluate
    opt = config.make_optimizer()
    rng = np.random.default_rng(config.seed)
    best_acc = -np.inf
    best_params = net.get_params()
    since_improve = 0
    history: list[dict] = []
    n = len(train_x)
    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(n)
        losses = []
        for bi, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start : start + config.batch_size]
            # per-batch dropout seed, reproducible across runs
            seed = int(
                np.random.SeedSequence([config.seed, epoch, bi]).generate_state(1)[0]
            )
            loss, grads = net.loss_and_grad(train_x[idx], train_y[idx], seed=seed)
            opt.step(net.params, grads)
            losses.append(loss)
        val_acc = float(evaluator(net, val_x, val_y))
        entry = {
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_accuracy": val_acc,
        }
        history.append(entry)
        if log:
            log(entry)
        if val_acc > best_acc:
            best_acc = val_acc
            best_params = net.get_params()
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= config.patience:
                break
    net.set_params(best_params)
    return best_params, history
