"""Layer stacks described by a serializable spec, with a binary output head."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .layers import Dense, Dropout, NonFiniteActivation, Recurrent, ShapeMismatch

RECURRENT_KINDS = ("rnn", "lstm", "gru")
PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # rnn | lstm | gru | dense | dropout
    units: int = 0
    activation: str = ""
    bidirectional: bool = False
    return_sequences: bool = False
    rate: float = 0.0


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple[LayerSpec, ...]
    n_features: int
    seq_len: int = 50

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        self.validate()

    def validate(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        sequence = True
        for i, ls in enumerate(self.layers):
            if ls.kind in RECURRENT_KINDS:
                if not sequence:
                    raise ValueError(f"layer {i}: recurrent layer after the sequence was reduced")
                if ls.units < 1:
                    raise ValueError(f"layer {i}: units must be positive")
                sequence = ls.return_sequences
            elif ls.kind == "dense":
                if sequence:
                    raise ValueError(f"layer {i}: dense layer needs a reduced (N, F) input")
                if ls.units < 1:
                    raise ValueError(f"layer {i}: units must be positive")
            elif ls.kind == "dropout":
                if not 0.0 <= ls.rate < 1.0:
                    raise ValueError(f"layer {i}: dropout rate must lie in [0, 1)")
            else:
                raise ValueError(f"layer {i}: unknown kind {ls.kind!r}")
        head = self.layers[-1]
        if head.kind != "dense" or (head.activation, head.units) not in (("sigmoid", 1), ("softmax", 2)):
            raise ValueError("last layer must be Dense(1, sigmoid) or Dense(2, softmax)")

    def to_json(self) -> str:
        return json.dumps(
            {"n_features": self.n_features, "seq_len": self.seq_len,
             "layers": [asdict(ls) for ls in self.layers]},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        d = json.loads(text)
        return cls(tuple(LayerSpec(**ls) for ls in d["layers"]), d["n_features"], d["seq_len"])


def _layer_params(ls: LayerSpec, n_in: int) -> tuple[int, int]:
    """(trainable parameter count, output width) of one layer."""
    if ls.kind in RECURRENT_KINDS:
        gates = {"rnn": 1, "lstm": 4, "gru": 3}[ls.kind]
        per_dir = gates * (ls.units * (n_in + ls.units) + ls.units)
        dirs = 2 if ls.bidirectional else 1
        return dirs * per_dir, dirs * ls.units
    if ls.kind == "dense":
        return ls.units * n_in + ls.units, ls.units
    return 0, n_in


def count_params(spec: NetworkSpec) -> int:
    total, width = 0, spec.n_features
    for ls in spec.layers:
        n, width = _layer_params(ls, width)
        total += n
    return total


def bce_loss(p, y) -> float:
    """Mean binary cross-entropy with probabilities clamped to [1e-7, 1-1e-7]."""
    p = np.clip(np.asarray(p, dtype=float), PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = np.asarray(y, dtype=float)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


class Network:
    def __init__(self, spec: NetworkSpec, seed: int = 0, dtype="float64"):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        self.layers = []
        width = spec.n_features
        for ls in spec.layers:
            if ls.kind in RECURRENT_KINDS:
                layer = Recurrent(ls.kind, ls.units, width, rng, ls.bidirectional,
                                  ls.return_sequences, ls.activation or "tanh")
            elif ls.kind == "dense":
                layer = Dense(ls.units, width, rng, ls.activation or "identity")
            else:
                layer = Dropout(ls.rate, width)
            layer.params = {k: v.astype(self.dtype) for k, v in layer.params.items()}
            self.layers.append(layer)
            width = layer.n_outputs

    @property
    def softmax_head(self) -> bool:
        return self.layers[-1].activation == "softmax"

    def parameters(self) -> dict[str, np.ndarray]:
        """Flat ``{"<layer index>.<name>": array}`` view of every weight (live references)."""
        return {f"{i}.{k}": v for i, l in enumerate(self.layers) for k, v in l.params.items()}

    def gradients(self) -> dict[str, np.ndarray]:
        return {f"{i}.{k}": v for i, l in enumerate(self.layers) for k, v in l.grads.items()}

    def set_parameters(self, values: dict[str, np.ndarray]):
        for name, v in values.items():
            i, k = name.split(".", 1)
            target = self.layers[int(i)].params[k]
            if target.shape != np.shape(v):
                raise ShapeMismatch(f"{name}: expected {target.shape}, got {np.shape(v)}")
            target[...] = v

    def count_params(self) -> int:
        return sum(l.n_params() for l in self.layers)

    def forward(self, x, train=False, rng=None) -> np.ndarray:
        """Positive-class probability per sequence; caches activations for backward."""
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 3 or x.shape[2] != self.spec.n_features:
            raise ShapeMismatch(
                f"expected (N, T, {self.spec.n_features}) batch, got {x.shape}"
            )
        if train and rng is None:
            raise ValueError("train-mode forward needs an rng for dropout")
        h = x
        for layer in self.layers:
            h = layer.forward(h, train=train, rng=rng)
        if not np.all(np.isfinite(h)):
            raise NonFiniteActivation("non-finite network output")
        return h[:, 1] if self.softmax_head else h[:, 0]

    def backward(self, p, y):
        """Gradients of the mean cross-entropy for the probabilities ``p`` just computed."""
        y = np.asarray(y, dtype=self.dtype)
        n = len(y)
        if self.softmax_head:
            # softmax + categorical cross-entropy: dL/da = (q - onehot) / n
            da = np.stack([(1.0 - p) - (1.0 - y), p - y], axis=1) / n
        else:
            da = ((p - y) / n)[:, None]
        dh = self.layers[-1].backward(da, preactivation=True)
        for layer in reversed(self.layers[:-1]):
            dh = layer.backward(dh)
        grads = self.gradients()
        for k, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient in {k}")
        return grads

    def loss_and_grad(self, x, y, train=True, rng=None):
        p = self.forward(x, train=train, rng=rng)
        loss = bce_loss(p, y)
        return loss, self.backward(p, y)

    def predict_proba(self, x, batch_size: int = 1024) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if len(x) == 0:
            return np.empty(0)
        return np.concatenate(
            [self.forward(x[i : i + batch_size]) for i in range(0, len(x), batch_size)]
        )
