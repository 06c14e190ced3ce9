from .network import (
    LayerSpec,
    NetworkSpec,
    Network,
    parse_arch,
    evaluate,
)
from .optim import Adam, SGDMomentum, adam_step, sgd_momentum_step
from .train import TrainConfig, train
from .serialize import save_model, load_model
from .gradcheck import finite_difference_check

__all__ = [
    "LayerSpec",
    "NetworkSpec",
    "Network",
    "parse_arch",
    "evaluate",
    "Adam",
    "SGDMomentum",
    "adam_step",
    "sgd_momentum_step",
    "TrainConfig",
    "train",
    "save_model",
    "load_model",
    "finite_difference_check",
]
