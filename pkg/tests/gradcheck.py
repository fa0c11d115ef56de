"""Central finite-difference check of network gradients.

The analytic gradients come from the float64 network. The finite
differences are taken on a copy running in extended precision
(``np.longdouble``) so that rounding noise in the difference quotient
stays far below the tolerance even for gradient entries near 1e-8.
"""

import numpy as np

from enginepdm.recurrent import LayerSpec, Network, NetworkSpec

EPS = 1e-5


def rel_error(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)


def max_rel_error(spec: NetworkSpec, seed: int, batch: int = 3) -> dict:
    """Worst relative error per parameter array for one random configuration.

    Dropout masks are held fixed by re-seeding the mask generator before
    every forward pass.
    """
    rng = np.random.default_rng([seed, 7])
    net = Network(spec, seed=seed, dtype="float64")
    x = rng.normal(size=(batch, spec.seq_len, spec.n_features))
    y = rng.integers(0, 2, batch).astype(float)
    p = net.forward(x, train=True, rng=np.random.default_rng(seed))
    analytic = {k: g.copy() for k, g in net.backward(p, y).items()}

    hi = Network(spec, seed=seed, dtype=np.longdouble)
    hi.set_parameters(net.parameters())
    x_hi, y_hi = x.astype(np.longdouble), y.astype(np.longdouble)

    def loss():
        q = hi.forward(x_hi, train=True, rng=np.random.default_rng(seed))
        return np.mean(-(y_hi * np.log(q) + (1 - y_hi) * np.log1p(-q)))

    worst = {}
    for name, w in hi.parameters().items():
        num = np.empty(w.shape)
        for i in np.ndindex(w.shape):
            old = w[i]
            w[i] = old + EPS
            up = loss()
            w[i] = old - EPS
            down = loss()
            w[i] = old
            num[i] = float((up - down) / (2 * EPS))
        worst[name] = float(rel_error(analytic[name], num).max())
    return worst


def random_spec(kind: str, seed: int, bidirectional=False, head="sigmoid", stacked=False,
                activation="tanh", dropout=0.0) -> NetworkSpec:
    """A small network around one recurrent cell type: hidden <= 8, seq <= 5."""
    rng = np.random.default_rng([seed, 3])
    H = int(rng.integers(2, 9))
    T = int(rng.integers(2, 6))
    D = int(rng.integers(2, 5))
    act = activation if kind == "rnn" else ""
    layers = []
    if stacked:
        layers.append(LayerSpec(kind, int(rng.integers(2, 9)), act, bidirectional, True))
        if dropout:
            layers.append(LayerSpec("dropout", rate=dropout))
    layers.append(LayerSpec(kind, H, act, bidirectional))
    if dropout:
        layers.append(LayerSpec("dropout", rate=dropout))
    layers.append(LayerSpec("dense", int(rng.integers(2, 9)), "relu"))
    layers.append(LayerSpec("dense", 2, "softmax") if head == "softmax" else LayerSpec("dense", 1, "sigmoid"))
    return NetworkSpec(tuple(layers), D, T)


# every cell type, both wrappers, dense heads of both kinds
CASES = [
    dict(kind="rnn"),
    dict(kind="rnn", activation="relu"),
    dict(kind="lstm"),
    dict(kind="gru"),
    dict(kind="rnn", bidirectional=True),
    dict(kind="lstm", bidirectional=True, head="softmax"),
    dict(kind="gru", bidirectional=True),
    dict(kind="lstm", stacked=True, dropout=0.3),
    dict(kind="gru", stacked=True, bidirectional=True, dropout=0.2),
]
