"""Minimal manually-differentiated layers for the micro CNN-BiLSTM.

Every layer caches what its backward pass needs during forward, accumulates
parameter gradients into :class:`Param` buffers, and returns the gradient
with respect to its input.  All math is float64 and every backward formula
is validated against central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Param",
    "Embedding",
    "Conv1D",
    "BatchNorm",
    "ReLU",
    "GlobalMaxPool",
    "Dense",
    "Dropout",
    "LSTM",
    "BiLSTM",
    "sigmoid",
]


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Param:
    """A tensor of learnable values with a same-shape gradient buffer."""

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Param({self.name}, shape={self.value.shape})"


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Embedding:
    """Token ids (B, T) → dense vectors (B, T, E); padding id is a real row."""

    def __init__(self, name: str, vocab_size: int, dim: int, rng: np.random.Generator):
        self.vocab_size = vocab_size
        self.dim = dim
        self.W = Param(f"{name}.W", rng.uniform(-0.05, 0.05, size=(vocab_size, dim)))
        self._ids = None

    def params(self):
        return [self.W]

    def forward(self, ids: np.ndarray, train: bool = False) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.min() < 0 or ids.max() >= self.vocab_size:
            raise ValueError(f"token id out of range [0, {self.vocab_size})")
        self._ids = ids
        return self.W.value[ids]

    def backward(self, dout: np.ndarray) -> None:
        np.add.at(self.W.grad, self._ids.ravel(), dout.reshape(-1, self.dim))
        return None  # no upstream gradient for integer ids


class Conv1D:
    """Temporal convolution: (B, T, E) → (B, T-k+1, F) via im2col."""

    def __init__(self, name: str, kernel: int, in_dim: int, maps: int, rng: np.random.Generator):
        self.kernel = kernel
        self.in_dim = in_dim
        self.maps = maps
        fan_in = kernel * in_dim
        self.W = Param(f"{name}.W", _glorot(rng, fan_in, maps, (fan_in, maps)))
        self.b = Param(f"{name}.b", np.zeros(maps))
        self._patches = None
        self._in_shape = None

    def params(self):
        return [self.W, self.b]

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        B, T, E = x.shape
        k = self.kernel
        if T < k:
            raise ValueError(f"sequence length {T} shorter than kernel {k}")
        windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=1)  # (B, T', E, k)
        patches = windows.transpose(0, 1, 3, 2).reshape(B, T - k + 1, k * E)
        self._patches = patches
        self._in_shape = x.shape
        return patches @ self.W.value + self.b.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        B, Tp, _ = dout.shape
        k, E = self.kernel, self.in_dim
        flat_patches = self._patches.reshape(-1, k * E)
        flat_dout = dout.reshape(-1, self.maps)
        self.W.grad += flat_patches.T @ flat_dout
        self.b.grad += flat_dout.sum(axis=0)
        dpatches = (dout @ self.W.value.T).reshape(B, Tp, k, E)
        dx = np.zeros(self._in_shape)
        for offset in range(k):
            dx[:, offset : offset + Tp, :] += dpatches[:, :, offset, :]
        return dx


class BatchNorm:
    """Per-feature normalization over the (batch, time) axes, biased variance."""

    def __init__(self, name: str, dim: int, eps: float = 1e-5, momentum: float = 0.1):
        self.dim = dim
        self.eps = eps
        self.momentum = momentum
        self.gamma = Param(f"{name}.gamma", np.ones(dim))
        self.beta = Param(f"{name}.beta", np.zeros(dim))
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self._cache = None

    def params(self):
        return [self.gamma, self.beta]

    def state(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        axes = tuple(range(x.ndim - 1))
        if train:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)  # biased
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, x - mean, train, axes)
        return self.gamma.value * xhat + self.beta.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        xhat, inv_std, centered, train, axes = self._cache
        self.gamma.grad += (dout * xhat).sum(axis=axes)
        self.beta.grad += dout.sum(axis=axes)
        dxhat = dout * self.gamma.value
        if not train:
            return dxhat * inv_std
        m = np.prod([dout.shape[a] for a in axes])
        dvar = (dxhat * centered).sum(axis=axes) * (-0.5) * inv_std**3
        dmean = -(dxhat.sum(axis=axes)) * inv_std + dvar * (-2.0 / m) * centered.sum(axis=axes)
        return dxhat * inv_std + dvar * 2.0 * centered / m + dmean / m


class ReLU:
    def __init__(self):
        self._mask = None

    def params(self):
        return []

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout * self._mask


class GlobalMaxPool:
    """(B, T, F) → (B, F), keeping argmax for the backward scatter."""

    def __init__(self):
        self._argmax = None
        self._in_shape = None

    def params(self):
        return []

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        self._argmax = x.argmax(axis=1)
        self._in_shape = x.shape
        return x.max(axis=1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        B, _, F = self._in_shape
        dx = np.zeros(self._in_shape)
        dx[np.arange(B)[:, None], self._argmax, np.arange(F)[None, :]] = dout
        return dx


class Dense:
    def __init__(self, name: str, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.W = Param(f"{name}.W", _glorot(rng, in_dim, out_dim, (in_dim, out_dim)))
        self.b = Param(f"{name}.b", np.zeros(out_dim))
        self._x = None

    def params(self):
        return [self.W, self.b]

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        self._x = x
        return x @ self.W.value + self.b.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        self.W.grad += self._x.T @ dout
        self.b.grad += dout.sum(axis=0)
        return dout @ self.W.value.T


class Dropout:
    """Inverted dropout; identity in eval mode or at rate 0."""

    def __init__(self, rate: float, rng: np.random.Generator):
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self.rng = rng
        self._mask = None

    def params(self):
        return []

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (self.rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return dout if self._mask is None else dout * self._mask


class LSTM:
    """Single-direction LSTM returning the full hidden sequence.

    Gate layout along the 4H axis is (input, forget, cell, output); the
    forget-gate bias starts at 1.0 so early training does not wash out the
    cell state.
    """

    def __init__(self, name: str, in_dim: int, hidden: int, rng: np.random.Generator):
        self.in_dim = in_dim
        self.hidden = hidden
        self.Wx = Param(f"{name}.Wx", _glorot(rng, in_dim, 4 * hidden, (in_dim, 4 * hidden)))
        self.Wh = Param(f"{name}.Wh", _glorot(rng, hidden, 4 * hidden, (hidden, 4 * hidden)))
        bias = np.zeros(4 * hidden)
        bias[hidden : 2 * hidden] = 1.0
        self.b = Param(f"{name}.b", bias)
        self._cache = None

    def params(self):
        return [self.Wx, self.Wh, self.b]

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        B, T, _ = x.shape
        H = self.hidden
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        gates, cells, hiddens, tanhc = [], [], [], []
        prev_h = [h]
        prev_c = [c]
        for t in range(T):
            z = x[:, t, :] @ self.Wx.value + h @ self.Wh.value + self.b.value
            i = sigmoid(z[:, :H])
            f = sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = sigmoid(z[:, 3 * H :])
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            gates.append((i, f, g, o))
            cells.append(c)
            tanhc.append(tc)
            hiddens.append(h)
            prev_h.append(h)
            prev_c.append(c)
        self._cache = (x, gates, cells, tanhc, prev_h[:-1], prev_c[:-1])
        return np.stack(hiddens, axis=1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x, gates, cells, tanhc, prev_h, prev_c = self._cache
        B, T, _ = x.shape
        H = self.hidden
        dx = np.zeros_like(x)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            i, f, g, o = gates[t]
            dh = dout[:, t, :] + dh_next
            do = dh * tanhc[t]
            dc = dh * o * (1.0 - tanhc[t] ** 2) + dc_next
            di = dc * g
            dg = dc * i
            df = dc * prev_c[t]
            dc_next = dc * f
            dz = np.concatenate(
                [
                    di * i * (1 - i),
                    df * f * (1 - f),
                    dg * (1 - g**2),
                    do * o * (1 - o),
                ],
                axis=1,
            )
            self.Wx.grad += x[:, t, :].T @ dz
            self.Wh.grad += prev_h[t].T @ dz
            self.b.grad += dz.sum(axis=0)
            dx[:, t, :] = dz @ self.Wx.value.T
            dh_next = dz @ self.Wh.value.T
        return dx


class BiLSTM:
    """Forward + reversed-input LSTM; output (B, T, 2H)."""

    def __init__(self, name: str, in_dim: int, hidden: int, rng: np.random.Generator):
        self.hidden = hidden
        self.fwd = LSTM(f"{name}.fwd", in_dim, hidden, rng)
        self.bwd = LSTM(f"{name}.bwd", in_dim, hidden, rng)

    def params(self):
        return self.fwd.params() + self.bwd.params()

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        out_f = self.fwd.forward(x, train)
        out_b = self.bwd.forward(x[:, ::-1, :], train)[:, ::-1, :]
        return np.concatenate([out_f, out_b], axis=2)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        H = self.hidden
        dx_f = self.fwd.backward(dout[:, :, :H])
        dx_b = self.bwd.backward(dout[:, ::-1, H:])[:, ::-1, :]
        return dx_f + dx_b
