"""Recurrent, dense and dropout layers with hand-written backward passes.

Shapes are batch-first: sequences are ``(N, T, D)``. Gate weights are
stacked row-wise; for a cell with ``G`` gates and ``H`` units

    W_in   (G*H, D)   input weights
    W_rec  (G*H, H)   recurrent weights
    b      (G*H,)     one bias per gate unit

Gate order: LSTM ``[input, forget, candidate, output]``, GRU
``[update, reset, candidate]``.
"""

from __future__ import annotations

import numpy as np


class ShapeMismatch(ValueError):
    pass


class NonFiniteActivation(FloatingPointError):
    pass


def sigmoid(a):
    # tanh form never overflows
    return 0.5 + 0.5 * np.tanh(0.5 * a)


def softmax(a):
    z = a - a.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def relu(a):
    return np.maximum(a, 0.0)


def _outer_sum(da, x):
    """sum over batch and time of da[n, t]^T x[n, t]"""
    return da.reshape(-1, da.shape[2]).T @ x.reshape(-1, x.shape[2])


def glorot(rng, fan_out, fan_in):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


class Layer:
    """Common interface: ``params``/``grads`` are dicts of same-shaped arrays."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# cells: full-sequence forward/backward over a params dict


class RNNCell:
    gates = 1

    def __init__(self, activation="tanh"):
        if activation not in ("tanh", "relu"):
            raise ValueError(f"unsupported recurrent activation {activation!r}")
        self.activation = activation

    def run(self, p, x):
        N, T, _ = x.shape
        H = p["W_rec"].shape[1]
        xw = x @ p["W_in"].T + p["b"]
        hs = np.zeros((N, T + 1, H), x.dtype)
        for t in range(T):
            a = xw[:, t] + hs[:, t] @ p["W_rec"].T
            hs[:, t + 1] = np.tanh(a) if self.activation == "tanh" else relu(a)
        return hs[:, 1:], (x, hs)

    def grad(self, p, dhs, cache):
        x, hs = cache
        N, T, _ = x.shape
        da_all = np.empty_like(dhs)
        dW_rec = np.zeros_like(p["W_rec"])
        dh = np.zeros((N, dhs.shape[2]), x.dtype)
        for t in reversed(range(T)):
            dh = dh + dhs[:, t]
            h = hs[:, t + 1]
            da = dh * (1.0 - h * h) if self.activation == "tanh" else dh * (h > 0)
            da_all[:, t] = da
            dW_rec += da.T @ hs[:, t]
            dh = da @ p["W_rec"]
        g = {
            "W_in": _outer_sum(da_all, x),
            "W_rec": dW_rec,
            "b": da_all.sum(axis=(0, 1)),
        }
        return da_all @ p["W_in"], g


class LSTMCell:
    gates = 4

    def run(self, p, x):
        N, T, _ = x.shape
        H = p["W_rec"].shape[1]
        xw = x @ p["W_in"].T + p["b"]
        hs = np.zeros((N, T + 1, H), x.dtype)
        cs = np.zeros((N, T + 1, H), x.dtype)
        acts = np.empty((N, T, 4 * H), x.dtype)
        for t in range(T):
            a = xw[:, t] + hs[:, t] @ p["W_rec"].T
            act = acts[:, t]
            act[:, : 2 * H] = sigmoid(a[:, : 2 * H])
            act[:, 2 * H : 3 * H] = np.tanh(a[:, 2 * H : 3 * H])
            act[:, 3 * H :] = sigmoid(a[:, 3 * H :])
            i, f, g, o = act[:, :H], act[:, H : 2 * H], act[:, 2 * H : 3 * H], act[:, 3 * H :]
            c = f * cs[:, t] + i * g
            cs[:, t + 1] = c
            hs[:, t + 1] = o * np.tanh(c)
        return hs[:, 1:], (x, hs, cs, acts)

    def grad(self, p, dhs, cache):
        x, hs, cs, acts = cache
        N, T, _ = x.shape
        H = hs.shape[2]
        da_all = np.empty((N, T, 4 * H), x.dtype)
        dW_rec = np.zeros_like(p["W_rec"])
        dh = np.zeros((N, H), x.dtype)
        dc = np.zeros((N, H), x.dtype)
        for t in reversed(range(T)):
            dh = dh + dhs[:, t]
            i, f = acts[:, t, :H], acts[:, t, H : 2 * H]
            g, o = acts[:, t, 2 * H : 3 * H], acts[:, t, 3 * H :]
            tc = np.tanh(cs[:, t + 1])
            dc = dc + dh * o * (1.0 - tc * tc)
            da = da_all[:, t]
            da[:, :H] = dc * g * i * (1.0 - i)
            da[:, H : 2 * H] = dc * cs[:, t] * f * (1.0 - f)
            da[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
            da[:, 3 * H :] = dh * tc * o * (1.0 - o)
            dW_rec += da.T @ hs[:, t]
            dh = da @ p["W_rec"]
            dc = dc * f
        g = {
            "W_in": _outer_sum(da_all, x),
            "W_rec": dW_rec,
            "b": da_all.sum(axis=(0, 1)),
        }
        return da_all @ p["W_in"], g


class GRUCell:
    """Reset gate applied to the previous state before the recurrent product."""

    gates = 3

    def run(self, p, x):
        N, T, _ = x.shape
        H = p["W_rec"].shape[1]
        xw = x @ p["W_in"].T + p["b"]
        U_zr, U_n = p["W_rec"][: 2 * H], p["W_rec"][2 * H :]
        hs = np.zeros((N, T + 1, H), x.dtype)
        acts = np.empty((N, T, 3 * H), x.dtype)
        for t in range(T):
            h = hs[:, t]
            zr = sigmoid(xw[:, t, : 2 * H] + h @ U_zr.T)
            z, r = zr[:, :H], zr[:, H:]
            n = np.tanh(xw[:, t, 2 * H :] + (r * h) @ U_n.T)
            hs[:, t + 1] = z * h + (1.0 - z) * n
            acts[:, t, : 2 * H] = zr
            acts[:, t, 2 * H :] = n
        return hs[:, 1:], (x, hs, acts)

    def grad(self, p, dhs, cache):
        x, hs, acts = cache
        N, T, _ = x.shape
        H = hs.shape[2]
        U_zr, U_n = p["W_rec"][: 2 * H], p["W_rec"][2 * H :]
        da_all = np.empty((N, T, 3 * H), x.dtype)
        dU_zr = np.zeros_like(U_zr)
        dU_n = np.zeros_like(U_n)
        dh = np.zeros((N, H), x.dtype)
        for t in reversed(range(T)):
            dh = dh + dhs[:, t]
            h = hs[:, t]
            z, r, n = acts[:, t, :H], acts[:, t, H : 2 * H], acts[:, t, 2 * H :]
            da = da_all[:, t]
            dan = dh * (1.0 - z) * (1.0 - n * n)
            drh = dan @ U_n
            da[:, :H] = dh * (h - n) * z * (1.0 - z)
            da[:, H : 2 * H] = drh * h * r * (1.0 - r)
            da[:, 2 * H :] = dan
            dU_n += dan.T @ (r * h)
            dU_zr += da[:, : 2 * H].T @ h
            dh = dh * z + drh * r + da[:, : 2 * H] @ U_zr
        g = {
            "W_in": _outer_sum(da_all, x),
            "W_rec": np.concatenate([dU_zr, dU_n]),
            "b": da_all.sum(axis=(0, 1)),
        }
        return da_all @ p["W_in"], g


CELLS = {"rnn": RNNCell, "lstm": LSTMCell, "gru": GRUCell}


class Recurrent(Layer):
    """One recurrent layer, optionally bidirectional.

    The bidirectional form runs a second cell with its own weights over the
    time-reversed input; per-step outputs are ``[forward, backward]``
    concatenated, with the backward half re-aligned to original time order.
    Without ``return_sequences`` the layer emits the forward state at the
    last step and the backward state after consuming the whole sequence.
    """

    def __init__(self, kind, units, n_inputs, rng, bidirectional=False,
                 return_sequences=False, activation="tanh"):
        super().__init__()
        self.kind = kind
        self.units = units
        self.n_inputs = n_inputs
        self.bidirectional = bidirectional
        self.return_sequences = return_sequences
        self.cell = RNNCell(activation) if kind == "rnn" else CELLS[kind]()
        G = self.cell.gates
        for d in self.directions:
            self.params[f"{d}W_in"] = glorot(rng, G * units, n_inputs)
            self.params[f"{d}W_rec"] = glorot(rng, G * units, units)
            b = np.zeros(G * units)
            if kind == "lstm":
                b[units : 2 * units] = 1.0  # forget gate starts open
            self.params[f"{d}b"] = b
        self._cache = None

    @property
    def directions(self):
        return ("fw.", "bw.") if self.bidirectional else ("",)

    @property
    def n_outputs(self):
        return self.units * (2 if self.bidirectional else 1)

    def _p(self, d):
        return {k: self.params[d + k] for k in ("W_in", "W_rec", "b")}

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[2] != self.n_inputs:
            raise ShapeMismatch(f"expected (N, T, {self.n_inputs}) input, got {x.shape}")
        outs, caches = [], []
        for d in self.directions:
            xin = x[:, ::-1] if d == "bw." else x
            hs, cache = self.cell.run(self._p(d), xin)
            outs.append(hs[:, ::-1] if d == "bw." else hs)
            caches.append(cache)
        self._cache = (x.shape, caches)
        if self.return_sequences:
            return np.concatenate(outs, axis=2)
        last = [outs[0][:, -1]]
        if self.bidirectional:
            last.append(outs[1][:, 0])
        return np.concatenate(last, axis=1)

    def backward(self, dout):
        shape, caches = self._cache
        N, T, _ = shape
        H = self.units
        dx = np.zeros(shape, dout.dtype)
        self.grads = {}
        for k, (d, cache) in enumerate(zip(self.directions, caches)):
            if self.return_sequences:
                dhs = dout[:, :, k * H : (k + 1) * H]
            else:
                dhs = np.zeros((N, T, H), dout.dtype)
                # in processing order the emitted state is always the final step
                dhs[:, -1 if d != "bw." else 0] = dout[:, k * H : (k + 1) * H]
            if d == "bw.":
                dhs = dhs[:, ::-1]
            dxin, g = self.cell.grad(self._p(d), np.ascontiguousarray(dhs), cache)
            dx += dxin[:, ::-1] if d == "bw." else dxin
            for name, v in g.items():
                self.grads[d + name] = v
        return dx


class Dense(Layer):
    ACTIVATIONS = ("identity", "relu", "sigmoid", "softmax")

    def __init__(self, units, n_inputs, rng, activation="identity"):
        super().__init__()
        if activation not in self.ACTIVATIONS:
            raise ValueError(f"unsupported activation {activation!r}")
        self.units = units
        self.n_inputs = n_inputs
        self.activation = activation
        self.params["W"] = glorot(rng, units, n_inputs)
        self.params["b"] = np.zeros(units)
        self._cache = None

    @property
    def n_outputs(self):
        return self.units

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ShapeMismatch(f"expected (N, {self.n_inputs}) input, got {x.shape}")
        a = x @ self.params["W"].T + self.params["b"]
        if self.activation == "relu":
            y = relu(a)
        elif self.activation == "sigmoid":
            y = sigmoid(a)
        elif self.activation == "softmax":
            y = softmax(a)
        else:
            y = a
        self._cache = (x, a, y)
        return y

    def backward(self, dout, preactivation=False):
        """``dout`` is dL/dy, or dL/da when ``preactivation`` is set."""
        x, a, y = self._cache
        if preactivation or self.activation == "identity":
            da = dout
        elif self.activation == "relu":
            da = dout * (a > 0)
        elif self.activation == "sigmoid":
            da = dout * y * (1.0 - y)
        else:
            da = y * (dout - (dout * y).sum(axis=1, keepdims=True))
        self.grads = {"W": da.T @ x, "b": da.sum(axis=0)}
        return da @ self.params["W"]


class Dropout(Layer):
    """Inverted dropout: survivors are scaled by ``1/(1-rate)`` at train time."""

    def __init__(self, rate, n_inputs):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate
        self.n_inputs = n_inputs
        self._mask = None

    @property
    def n_outputs(self):
        return self.n_inputs

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = ((rng.random(x.shape) < keep) / keep).astype(x.dtype)
        return x * self._mask

    def backward(self, dout):
        return dout if self._mask is None else dout * self._mask
