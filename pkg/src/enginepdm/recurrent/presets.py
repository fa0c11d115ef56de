"""Default architectures and training settings for the recurrent families."""

from .network import LayerSpec, NetworkSpec
from .training import TrainConfig

DEEP_FAMILIES = ("lstm", "bilstm", "rnn", "birnn", "gru")


def _lstm(n_features, seq_len, bidirectional, dropout, softmax_head=False):
    head = LayerSpec("dense", 2, "softmax") if softmax_head else LayerSpec("dense", 1, "sigmoid")
    return NetworkSpec(
        (
            LayerSpec("lstm", 100, bidirectional=bidirectional, return_sequences=True),
            LayerSpec("dropout", rate=dropout),
            LayerSpec("lstm", 50, bidirectional=bidirectional),
            LayerSpec("dropout", rate=dropout),
            head,
        ),
        n_features,
        seq_len,
    )


def _rnn(n_features, seq_len, bidirectional, units=16):
    return NetworkSpec(
        (
            LayerSpec("rnn", units, "tanh", bidirectional=bidirectional),
            LayerSpec("dense", 8, "relu"),
            LayerSpec("dense", 1, "sigmoid"),
        ),
        n_features,
        seq_len,
    )


def _gru(n_features, seq_len, dropout, units=(100, 50)):
    layers = []
    for i, u in enumerate(units):
        layers.append(LayerSpec("gru", u, return_sequences=i < len(units) - 1))
        layers.append(LayerSpec("dropout", rate=dropout))
    layers.append(LayerSpec("dense", 1, "sigmoid"))
    return NetworkSpec(tuple(layers), n_features, seq_len)


def network_spec(family: str, n_features: int, seq_len: int = 50, **overrides) -> NetworkSpec:
    if family == "lstm":
        return _lstm(n_features, seq_len, False, overrides.get("dropout", 0.5),
                     overrides.get("softmax_head", False))
    if family == "bilstm":
        return _lstm(n_features, seq_len, True, overrides.get("dropout", 0.5),
                     overrides.get("softmax_head", False))
    if family == "rnn":
        return _rnn(n_features, seq_len, False, overrides.get("units", 16))
    if family == "birnn":
        return _rnn(n_features, seq_len, True, overrides.get("units", 16))
    if family == "gru":
        return _gru(n_features, seq_len, overrides.get("dropout", 0.2),
                    tuple(overrides.get("gru_units", (100, 50))))
    raise ValueError(f"unknown recurrent family {family!r}")


_TRAIN = {
    "rnn": dict(batch_size=64, epochs=15, validation_split=0.1),
    "birnn": dict(batch_size=64, epochs=15, validation_split=0.1),
    "lstm": dict(batch_size=64, epochs=15, validation_split=0.2),
    "bilstm": dict(batch_size=64, epochs=15, validation_split=0.2),
    "gru": dict(batch_size=200, epochs=20, validation_split=0.2),
}


def train_config(family: str, seed: int = 0, **overrides) -> TrainConfig:
    if family not in _TRAIN:
        raise ValueError(f"unknown recurrent family {family!r}")
    return TrainConfig(**{**_TRAIN[family], "seed": seed, **overrides})
