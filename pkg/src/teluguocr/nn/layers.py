"""Layer implementations: 3x3 convolution, ReLU, max pooling, dense,
inverted dropout, softmax.

Layers hold parameters but no forward state: `forward` returns an opaque
cache consumed by `backward`, so shared (spec, params) can serve
concurrent inference.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError


class Layer:
    params: list[np.ndarray]

    def __init__(self):
        self.params = []

    def init_params(self, rng: np.random.Generator, dtype) -> None:
        pass

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    def forward(self, x: np.ndarray, train: bool, rng) -> tuple[np.ndarray, object]:
        raise NotImplementedError

    def backward(self, dout: np.ndarray, cache) -> tuple[np.ndarray, list[np.ndarray]]:
        raise NotImplementedError


def _he_uniform(rng, fan_in: int, shape, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Conv3x3(Layer):
    """3x3 convolution, stride 1, same padding."""

    def __init__(self, in_channels: int, filters: int):
        super().__init__()
        self.in_channels = in_channels
        self.filters = filters

    def init_params(self, rng, dtype):
        w = _he_uniform(rng, 9 * self.in_channels, (self.filters, self.in_channels, 3, 3), dtype)
        b = np.zeros(self.filters, dtype=dtype)
        self.params = [w, b]

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_channels:
            raise ShapeError(f"conv expects {self.in_channels} channels, got {c}")
        return (self.filters, h, w)

    def _im2col(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        cols = np.empty((b, c, 3, 3, h, w), dtype=x.dtype)
        for i in range(3):
            for j in range(3):
                cols[:, :, i, j] = xp[:, :, i : i + h, j : j + w]
        return cols.reshape(b, c * 9, h * w)

    def forward(self, x, train, rng):
        w, bias = self.params
        b, c, h, wid = x.shape
        cols = self._im2col(x)
        wm = w.reshape(self.filters, c * 9)
        y = np.matmul(wm, cols).reshape(b, self.filters, h, wid)
        y += bias[None, :, None, None]
        return y, (cols, x.shape)

    def backward(self, dout, cache):
        cols, x_shape = cache
        b, c, h, w = x_shape
        wmat, _ = self.params
        dy = dout.reshape(b, self.filters, h * w)
        dw = np.einsum("bof,bcf->oc", dy, cols, optimize=True).reshape(wmat.shape)
        db = dout.sum(axis=(0, 2, 3), dtype=np.float64).astype(wmat.dtype)
        wm = wmat.reshape(self.filters, c * 9)
        dcols = np.matmul(wm.T, dy)  # (b, c*9, h*w)
        dcols = dcols.reshape(b, c, 3, 3, h, w)
        dxp = np.zeros((b, c, h + 2, w + 2), dtype=dout.dtype)
        for i in range(3):
            for j in range(3):
                dxp[:, :, i : i + h, j : j + w] += dcols[:, :, i, j]
        return dxp[:, :, 1 : 1 + h, 1 : 1 + w], [dw.astype(wmat.dtype), db]


class ReLU(Layer):
    def forward(self, x, train, rng):
        y = np.maximum(x, 0)
        return y, x > 0

    def backward(self, dout, cache):
        return dout * cache, []


class MaxPool(Layer):
    """Max pooling; pool 2 uses stride 2 no padding, pool 3 uses stride 2
    with 1 px of padding so spatial size halves (Cifar-style)."""

    def __init__(self, pool: int):
        super().__init__()
        if pool not in (2, 3):
            raise ShapeError(f"pool size must be 2 or 3, got {pool}")
        self.pool = pool
        self.stride = 2
        self.pad = 0 if pool == 2 else 1

    def out_shape(self, in_shape):
        c, h, w = in_shape
        oh = (h + 2 * self.pad - self.pool) // self.stride + 1
        ow = (w + 2 * self.pad - self.pool) // self.stride + 1
        if oh < 1 or ow < 1:
            raise ShapeError(f"pooling collapses {h}x{w} below 1x1")
        return (c, oh, ow)

    def forward(self, x, train, rng):
        b, c, h, w = x.shape
        p, s, pad = self.pool, self.stride, self.pad
        if pad:
            xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)),
                        constant_values=-np.inf)
        else:
            xp = x
        hp, wp = xp.shape[2], xp.shape[3]
        oh = (hp - p) // s + 1
        ow = (wp - p) // s + 1
        windows = np.lib.stride_tricks.sliding_window_view(xp, (p, p), axis=(2, 3))
        windows = windows[:, :, ::s, ::s][:, :, :oh, :ow]
        flat = windows.reshape(b, c, oh, ow, p * p)
        idx = flat.argmax(axis=-1)
        y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        return np.ascontiguousarray(y), (idx, x.shape, (oh, ow))

    def backward(self, dout, cache):
        idx, x_shape, (oh, ow) = cache
        b, c, h, w = x_shape
        p, s, pad = self.pool, self.stride, self.pad
        dxp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=dout.dtype)
        bi, ci, ri, qi = np.meshgrid(
            np.arange(b), np.arange(c), np.arange(oh), np.arange(ow), indexing="ij"
        )
        rows = ri * s + idx // p
        cols = qi * s + idx % p
        np.add.at(dxp, (bi, ci, rows, cols), dout)
        if pad:
            dxp = dxp[:, :, pad:-pad, pad:-pad]
        return dxp, []


class Dense(Layer):
    def __init__(self, in_features: int, units: int):
        super().__init__()
        self.in_features = in_features
        self.units = units

    def init_params(self, rng, dtype):
        w = _he_uniform(rng, self.in_features, (self.units, self.in_features), dtype)
        b = np.zeros(self.units, dtype=dtype)
        self.params = [w, b]

    def out_shape(self, in_shape):
        flat = int(np.prod(in_shape))
        if flat != self.in_features:
            raise ShapeError(f"dense expects {self.in_features} inputs, got {flat}")
        return (self.units,)

    def forward(self, x, train, rng):
        x2 = x.reshape(x.shape[0], -1)
        w, b = self.params
        return x2 @ w.T + b, (x2, x.shape)

    def backward(self, dout, cache):
        x2, x_shape = cache
        w, _ = self.params
        dw = dout.T @ x2
        db = dout.sum(axis=0, dtype=np.float64).astype(w.dtype)
        dx = (dout @ w).reshape(x_shape)
        return dx, [dw.astype(w.dtype), db]


class Dropout(Layer):
    """Inverted dropout: scaling happens at train time, eval is identity."""

    def __init__(self, rate: float = 0.5):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ShapeError(f"drop rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, train, rng):
        if not train or self.rate == 0.0:
            return x, None
        mask = (rng.random(x.shape) >= self.rate).astype(x.dtype) / (1.0 - self.rate)
        return x * mask, mask

    def backward(self, dout, cache):
        if cache is None:
            return dout, []
        return dout * cache, []


class Softmax(Layer):
    def forward(self, x, train, rng):
        shifted = x - x.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=1, keepdims=True, dtype=np.float64).astype(x.dtype)
        return y, y

    def backward(self, dout, cache):
        y = cache
        inner = (dout * y).sum(axis=1, keepdims=True)
        return y * (dout - inner), []
