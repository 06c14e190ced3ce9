"""Architecture strings, network construction, forward/backward.

Architecture grammar: TOKEN("-"TOKEN)* with TOKEN in {CRPn, CRPCn, CRPLn,
Dn, DDn}.

  CRP n   conv 3x3 (n filters) + ReLU + max-pool 2x2
  CRPC n  conv 3x3 (n filters) + ReLU + max-pool 3x3 (stride 2, pad 1)
  CRPL n  same realization as CRP n (the Lenet-style variant differs only
          in the architecture string, not the layer kinds)
  D n     dense(n) + ReLU
  DD n    dropout + dense(n) + ReLU

A Dense(num_classes) + Softmax head is always appended.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError, ParseError, ShapeError
from . import layers as L

INPUT_SHAPE = (1, 32, 32)
DEFAULT_DROPOUT = 0.5

_TOKEN_RE = re.compile(r"^(CRPC|CRPL|CRP|DD|D)(\d+)$")


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # Conv3x3 | ReLU | MaxPool2 | MaxPool3 | Dense | Dropout | Softmax
    n: int = 0       # filters or units
    rate: float = 0.0


@dataclass(frozen=True)
class NetworkSpec:
    arch: str
    num_classes: int
    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, int, int] = INPUT_SHAPE
    name: str = ""
    dropout_rate: float = DEFAULT_DROPOUT


def parse_arch(
    arch: str,
    num_classes: int,
    name: str = "",
    input_shape: tuple[int, int, int] = INPUT_SHAPE,
    dropout_rate: float = DEFAULT_DROPOUT,
) -> NetworkSpec:
    if num_classes < 2:
        raise ParseError(f"class count must be >= 2, got {num_classes}")
    specs: list[LayerSpec] = []
    for token in arch.split("-"):
        m = _TOKEN_RE.match(token.strip())
        if not m:
            raise ParseError(f"unknown architecture token {token!r}")
        kind, n = m.group(1), int(m.group(2))
        if n <= 0:
            raise ParseError(f"layer size must be positive in token {token!r}")
        if kind in ("CRP", "CRPL"):
            specs += [LayerSpec("Conv3x3", n), LayerSpec("ReLU"), LayerSpec("MaxPool2")]
        elif kind == "CRPC":
            specs += [LayerSpec("Conv3x3", n), LayerSpec("ReLU"), LayerSpec("MaxPool3")]
        elif kind == "D":
            specs += [LayerSpec("Dense", n), LayerSpec("ReLU")]
        else:  # DD
            specs += [
                LayerSpec("Dropout", rate=dropout_rate),
                LayerSpec("Dense", n),
                LayerSpec("ReLU"),
            ]
    specs += [LayerSpec("Dense", num_classes), LayerSpec("Softmax")]
    spec = NetworkSpec(
        arch=arch,
        num_classes=num_classes,
        layers=tuple(specs),
        input_shape=tuple(input_shape),
        name=name or arch,
        dropout_rate=dropout_rate,
    )
    _build_layers(spec)  # validates shapes; raises ParseError on collapse
    return spec


def _build_layers(spec: NetworkSpec) -> tuple[list[L.Layer], list[tuple]]:
    built: list[L.Layer] = []
    shapes = [spec.input_shape]
    shape = spec.input_shape
    for ls in spec.layers:
        if ls.kind == "Conv3x3":
            if len(shape) != 3:
                raise ParseError(f"convolution after flatten in {spec.arch!r}")
            layer = L.Conv3x3(shape[0], ls.n)
        elif ls.kind == "ReLU":
            layer = L.ReLU()
        elif ls.kind == "MaxPool2":
            layer = L.MaxPool(2)
        elif ls.kind == "MaxPool3":
            layer = L.MaxPool(3)
        elif ls.kind == "Dense":
            layer = L.Dense(int(np.prod(shape)), ls.n)
        elif ls.kind == "Dropout":
            layer = L.Dropout(ls.rate)
        elif ls.kind == "Softmax":
            layer = L.Softmax()
        else:
            raise ParseError(f"unknown layer kind {ls.kind!r}")
        try:
            shape = layer.out_shape(shape)
        except ShapeError as exc:
            raise ParseError(f"invalid architecture {spec.arch!r}: {exc}") from exc
        built.append(layer)
        shapes.append(shape)
    return built, shapes


class Network:
    """A NetworkSpec instantiated with parameters.

    Forward passes keep their caches on the stack, so a Network with
    frozen parameters is safe to share across threads for inference.
    """

    def __init__(self, spec: NetworkSpec, seed: int = 0, dtype=np.float32):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        self.layers, self.shapes = _build_layers(spec)
        rng = np.random.default_rng(seed)
        for layer in self.layers:
            layer.init_params(rng, self.dtype)
        self.init_seed = seed

    # -- parameters ---------------------------------------------------

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.params)
        return out

    def param_names(self) -> list[str]:
        names = []
        for i, layer in enumerate(self.layers):
            for j in range(len(layer.params)):
                names.append(f"layer{i}.{'Wb'[j]}")
        return names

    def param_count(self) -> int:
        return sum(p.size for p in self.params)

    def get_params(self) -> list[np.ndarray]:
        return [p.copy() for p in self.params]

    def set_params(self, values: list[np.ndarray]) -> None:
        flat = self.params
        if len(flat) != len(values):
            raise ShapeError(f"expected {len(flat)} parameter tensors, got {len(values)}")
        k = 0
        for layer in self.layers:
            for j in range(len(layer.params)):
                v = np.asarray(values[k], dtype=self.dtype)
                if v.shape != layer.params[j].shape:
                    raise ShapeError(
                        f"parameter {k} shape {v.shape} != {layer.params[j].shape}"
                    )
                layer.params[j] = v
                k += 1

    def astype(self, dtype) -> "Network":
        clone = Network(self.spec, seed=self.init_seed, dtype=dtype)
        clone.set_params([p.astype(dtype) for p in self.params])
        return clone

    # -- execution ----------------------------------------------------

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1:] != self.spec.input_shape:
            raise ShapeError(
                f"batch shape {x.shape} does not match input {self.spec.input_shape}"
            )
        return np.ascontiguousarray(x, dtype=self.dtype)

    def forward(self, x: np.ndarray, train: bool = False, seed: int = 0) -> np.ndarray:
        """Class probabilities (B, C); dropout active only when train=True."""
        x = self._check_input(x)
        rng = np.random.default_rng(seed) if train else None
        for layer in self.layers:
            x, _ = layer.forward(x, train, rng)
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite activation in forward pass")
        return x

    def _forward_logits(self, x, train, rng):
        caches = []
        for layer in self.layers[:-1]:  # exclude the softmax head
            x, cache = layer.forward(x, train, rng)
            caches.append(cache)
        return x, caches

    def loss_and_grad(
        self, x: np.ndarray, y: np.ndarray, seed: int = 0, train: bool = True
    ) -> tuple[float, list[np.ndarray]]:
        """Mean softmax cross-entropy and exact analytic parameter gradients."""
        x = self._check_input(x)
        b = x.shape[0]
        rng = np.random.default_rng(seed)
        logits, caches = self._forward_logits(x, train, rng)
        z = logits.astype(np.float64)
        z -= z.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        loss = float(-logp[np.arange(b), y].mean())
        if not np.isfinite(loss):
            raise NumericError("non-finite loss")
        probs = np.exp(logp)
        dlogits = probs
        dlogits[np.arange(b), y] -= 1.0
        dlogits = (dlogits / b).astype(self.dtype)
        grads_rev: list[np.ndarray] = []
        dout = dlogits
        for layer, cache in zip(reversed(self.layers[:-1]), reversed(caches)):
            dout, g = layer.backward(dout, cache)
            grads_rev = g + grads_rev
        for g in grads_rev:
            if not np.all(np.isfinite(g)):
                raise NumericError("non-finite gradient")
        return loss, grads_rev


def evaluate(net: Network, x: np.ndarray, y: np.ndarray, batch_size: int = 500) -> float:
    """Top-1 accuracy in eval mode."""
    if len(x) == 0:
        raise ShapeError("cannot evaluate on an empty dataset")
    correct = 0
    for start in range(0, len(x), batch_size):
        probs = net.forward(x[start : start + batch_size], train=False)
        correct += int((probs.argmax(axis=1) == y[start : start + batch_size]).sum())
    return correct / len(x)
