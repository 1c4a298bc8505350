"""Layer primitives with hand-written backward passes.

Convolutions run as im2col + GEMM, which is where the arithmetic lives;
everything keeps the dtype of its weights (float32 for training, float64
for gradient checks). Layers cache what forward saw and accumulate
parameter gradients in ``grads`` until ``zero_grads``.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError


class Layer:
    """Base: parameter-less layers get free params/grads plumbing."""

    name = ""

    def params(self) -> dict:
        return {}

    def grads(self) -> dict:
        return {}

    def zero_grads(self) -> None:
        for g in self.grads().values():
            g[...] = 0.0


def _im2col(x_pad: np.ndarray, k: int, h: int, w: int) -> np.ndarray:
    """(N, C, Hp, Wp) -> (C*k*k, N*h*w) patch matrix.

    Channel-major column layout so the whole batch convolves as one GEMM.
    """
    n, c = x_pad.shape[:2]
    cols = np.empty((c, k, k, n, h, w), dtype=x_pad.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, i, j] = x_pad[:, :, i : i + h, j : j + w].transpose(1, 0, 2, 3)
    return cols.reshape(c * k * k, n * h * w)


def _col2im(dcols: np.ndarray, n: int, c: int, k: int, h: int, w: int, pad: int) -> np.ndarray:
    """Adjoint of _im2col: scatter-add patches back into the padded image."""
    dcols = dcols.reshape(c, k, k, n, h, w)
    dx_pad = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=dcols.dtype)
    for i in range(k):
        for j in range(k):
            dx_pad[:, :, i : i + h, j : j + w] += dcols[:, i, j].transpose(1, 0, 2, 3)
    if pad == 0:
        return dx_pad
    return dx_pad[:, :, pad:-pad, pad:-pad]


class Conv2d(Layer):
    """Same-padding 2-D convolution, odd kernel size."""

    def __init__(self, c_in: int, c_out: int, ksize: int, rng, name: str, dtype=np.float32):
        if ksize % 2 != 1:
            raise ShapeError("kernel size must be odd to keep same padding")
        self.c_in, self.c_out, self.k = c_in, c_out, ksize
        self.pad = ksize // 2
        self.name = name
        scale = np.sqrt(2.0 / (c_in * ksize * ksize))
        self.w = (rng.standard_normal((c_out, c_in, ksize, ksize)) * scale).astype(dtype)
        # Small positive bias: dead receptive fields (all-zero ReLU patches)
        # would otherwise put pre-activations exactly on the ReLU kink, which
        # poisons finite-difference gradient checks.
        self.b = np.full(c_out, 0.01, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cols = None
        self._x_shape = None

    def params(self) -> dict:
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}

    def grads(self) -> dict:
        return {f"{self.name}.w": self.dw, f"{self.name}.b": self.db}

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, c, h, w = x.shape
        if c != self.c_in:
            raise ShapeError(f"{self.name}: expected {self.c_in} channels, got {c}")
        p = self.pad
        x_pad = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        cols = _im2col(x_pad, self.k, h, w)
        self._cols = cols
        self._x_shape = x.shape
        w_mat = self.w.reshape(self.c_out, -1)
        out = (w_mat @ cols + self.b[:, None]).reshape(self.c_out, n, h, w)
        return np.ascontiguousarray(out.transpose(1, 0, 2, 3))

    def backward(self, dy: np.ndarray) -> np.ndarray:
        n, _, h, w = self._x_shape
        dy_mat = np.ascontiguousarray(dy.transpose(1, 0, 2, 3)).reshape(self.c_out, n * h * w)
        w_mat = self.w.reshape(self.c_out, -1)
        dw_mat = self.dw.reshape(self.c_out, -1)
        dw_mat += dy_mat @ self._cols.T
        self.db += dy_mat.sum(axis=1)
        dcols = w_mat.T @ dy_mat
        return _col2im(dcols, n, self.c_in, self.k, h, w, self.pad)


class ReLU(Layer):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return dy * self._mask


class Sigmoid(Layer):
    def forward(self, x: np.ndarray) -> np.ndarray:
        # split by sign to keep exp() arguments non-positive
        pos = x >= 0
        e = np.exp(np.where(pos, -x, x))
        self._y = np.where(pos, 1.0 / (1.0 + e), e / (1.0 + e))
        return self._y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return dy * self._y * (1.0 - self._y)


class MaxPool2x2(Layer):
    """2x2 max pooling; ties route the gradient to the first maximum."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ShapeError("pooling input dims must be even")
        blocks = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        flat = blocks.reshape(n, c, h // 2, w // 2, 4)
        self._arg = np.argmax(flat, axis=-1)
        self._x_shape = x.shape
        return np.take_along_axis(flat, self._arg[..., None], axis=-1)[..., 0]

    def backward(self, dy: np.ndarray) -> np.ndarray:
        n, c, h, w = self._x_shape
        dflat = np.zeros((n, c, h // 2, w // 2, 4), dtype=dy.dtype)
        np.put_along_axis(dflat, self._arg[..., None], dy[..., None], axis=-1)
        dx = dflat.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return dx.reshape(n, c, h, w)


class UpsampleNearest2x(Layer):
    def forward(self, x: np.ndarray) -> np.ndarray:
        return x.repeat(2, axis=2).repeat(2, axis=3)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        n, c, h, w = dy.shape
        return dy.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


class AttentionGate(Layer):
    """Additive attention on a skip connection.

    mask = sigmoid(psi(relu(Wg g + Wx x))); output is x * mask with the
    single-channel mask broadcast over channels.
    """

    def __init__(self, c_g: int, c_x: int, c_int: int, rng, name: str, dtype=np.float32):
        self.name = name
        self.wg = Conv2d(c_g, c_int, 1, rng, f"{name}.wg", dtype)
        self.wx = Conv2d(c_x, c_int, 1, rng, f"{name}.wx", dtype)
        self.psi = Conv2d(c_int, 1, 1, rng, f"{name}.psi", dtype)
        self.relu = ReLU()
        self.sigmoid = Sigmoid()

    def params(self) -> dict:
        return {**self.wg.params(), **self.wx.params(), **self.psi.params()}

    def grads(self) -> dict:
        return {**self.wg.grads(), **self.wx.grads(), **self.psi.grads()}

    def forward(self, g: np.ndarray, x: np.ndarray) -> np.ndarray:
        if g.shape[2:] != x.shape[2:]:
            raise ShapeError(f"{self.name}: gating and skip spatial dims differ")
        q = self.relu.forward(self.wg.forward(g) + self.wx.forward(x))
        self._mask = self.sigmoid.forward(self.psi.forward(q))
        self._x = x
        return x * self._mask

    def backward(self, dy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dmask = (dy * self._x).sum(axis=1, keepdims=True)
        dx = dy * self._mask
        dq = self.psi.backward(self.sigmoid.backward(dmask))
        dsum = self.relu.backward(dq)
        dg = self.wg.backward(dsum)
        dx = dx + self.wx.backward(dsum)
        return dg, dx
