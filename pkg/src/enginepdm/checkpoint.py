"""Self-describing text checkpoints for every model family.

Layout (UTF-8 text)::

    enginepdm-checkpoint 1
    <key>: <value>                 header lines, one per key
    ...
    array <name> <f8|i8> <d1,d2,...>
    <values, row-major, up to 8 per line>
    ...
    end

Floats are written with ``float.hex`` so a save/load cycle is bit-exact;
integers are decimal. A zero-dimensional shape is written as ``-``.
Header keys always include ``family``, ``seed`` and ``n_features``;
recurrent checkpoints add ``spec`` (JSON layer list), tree ensembles add
``n_trees`` and store each tree as preorder node arrays ``tree<i>.*``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .baselines.bayes import GaussianNB
from .baselines.boosting import GbmClassifier, GbmConfig
from .baselines.forest import ForestClassifier, ForestConfig
from .baselines.knn import KnnClassifier, KnnConfig
from .baselines.tree import DecisionTree
from .recurrent.network import Network, NetworkSpec
from .recurrent.training import RecurrentClassifier

MAGIC = "enginepdm-checkpoint 1"


class CheckpointError(ValueError):
    pass


def _fmt(v, kind):
    return float(v).hex() if kind == "f8" else str(int(v))


def dumps(header: dict, arrays: dict) -> str:
    out = [MAGIC]
    for k, v in header.items():
        if "\n" in str(v) or ":" in k:
            raise CheckpointError(f"header entry {k!r} cannot be stored")
        out.append(f"{k}: {v}")
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        kind = "i8" if np.issubdtype(arr.dtype, np.integer) else "f8"
        shape = ",".join(str(s) for s in arr.shape) or "-"
        out.append(f"array {name} {kind} {shape}")
        flat = arr.ravel()
        for i in range(0, flat.size, 8):
            out.append(" ".join(_fmt(v, kind) for v in flat[i : i + 8]))
    out.append("end")
    return "\n".join(out) + "\n"


def loads(text: str) -> tuple[dict, dict]:
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise CheckpointError("not an enginepdm checkpoint")
    header, arrays = {}, {}
    i = 1
    while i < len(lines) and not lines[i].startswith("array ") and lines[i] != "end":
        k, v = lines[i].split(": ", 1)
        header[k] = v
        i += 1
    while i < len(lines) and lines[i] != "end":
        _, name, kind, shape_s = lines[i].split(" ")
        shape = () if shape_s == "-" else tuple(int(s) for s in shape_s.split(","))
        size = int(np.prod(shape))
        n_lines = -(-size // 8)
        tokens = " ".join(lines[i + 1 : i + 1 + n_lines]).split()
        if len(tokens) != size:
            raise CheckpointError(f"array {name}: expected {size} values, found {len(tokens)}")
        if kind == "f8":
            arr = np.array([float.fromhex(t) for t in tokens], dtype=float)
        else:
            arr = np.array([int(t) for t in tokens], dtype=np.int64)
        arrays[name] = arr.reshape(shape)
        i += 1 + n_lines
    if i >= len(lines):
        raise CheckpointError("truncated checkpoint (missing 'end')")
    return header, arrays


def model_state(model) -> tuple[dict, dict]:
    """Family-specific header entries and arrays for ``model``."""
    if isinstance(model, RecurrentClassifier):
        header = {"family": model.family, "spec": model.spec.to_json(),
                  "dtype": model.network.dtype.name,
                  "n_params": str(model.network.count_params())}
        arrays = {f"w.{k}": v for k, v in model.network.parameters().items()}
        return header, arrays
    if isinstance(model, ForestClassifier):
        cfg = model.config
        header = {"family": "rf", "n_trees": str(len(model.trees)),
                  "max_depth": str(cfg.max_depth), "n_features": str(model.n_features)}
        arrays = {}
        for i, t in enumerate(model.trees):
            arrays.update(t.to_arrays(f"tree{i}."))
        return header, arrays
    if isinstance(model, GbmClassifier):
        cfg = model.config
        header = {"family": "gbm", "n_trees": str(len(model.trees)),
                  "learning_rate": repr(cfg.learning_rate), "max_depth": str(cfg.max_depth),
                  "max_features": str(cfg.max_features), "n_features": str(model.n_features)}
        arrays = {"base_rate": np.array(model.base_rate)}
        for i, t in enumerate(model.trees):
            arrays.update(t.to_arrays(f"tree{i}."))
        return header, arrays
    if isinstance(model, KnnClassifier):
        header = {"family": "knn", "k": str(model.config.k), "n_features": str(model.n_features)}
        return header, {"train_x": model.X, "train_y": model.y}
    if isinstance(model, GaussianNB):
        header = {"family": "nb", "n_features": str(model.n_features)}
        return header, {"prior": model.prior, "theta": model.theta, "var": model.var}
    raise CheckpointError(f"cannot checkpoint {type(model).__name__}")


def _opt_int(s):
    return None if s == "None" else int(s)


def model_from_state(header: dict, arrays: dict):
    family = header["family"]
    seed = int(header.get("seed", 0))
    if "spec" in header:
        spec = NetworkSpec.from_json(header["spec"])
        net = Network(spec, seed=seed, dtype=header.get("dtype", "float64"))
        net.set_parameters({k[2:]: v for k, v in arrays.items() if k.startswith("w.")})
        return RecurrentClassifier(net, family, seed)
    if family in ("rf", "gbm"):
        crit = "gini" if family == "rf" else "mse"
        trees = [DecisionTree.from_arrays(arrays, f"tree{i}.", crit)
                 for i in range(int(header["n_trees"]))]
        n_features = int(header["n_features"])
        if family == "rf":
            cfg = ForestConfig(len(trees), _opt_int(header["max_depth"]), seed=seed)
            return ForestClassifier(trees, n_features, cfg)
        cfg = GbmConfig(len(trees), float(header["learning_rate"]), int(header["max_depth"]),
                        _opt_int(header["max_features"]), seed)
        return GbmClassifier(float(arrays["base_rate"]), trees, n_features, cfg)
    if family == "knn":
        return KnnClassifier(arrays["train_x"], arrays["train_y"], KnnConfig(int(header["k"])))
    if family == "nb":
        return GaussianNB(arrays["prior"], arrays["theta"], arrays["var"])
    raise CheckpointError(f"unknown model family {family!r}")


def save(path, model, header: dict | None = None, arrays: dict | None = None):
    """Write ``model`` plus extra header entries / arrays (e.g. feature spread)."""
    h, a = model_state(model)
    full_header = {**(header or {}), **h}
    text = dumps(full_header, {**(arrays or {}), **a})
    Path(path).write_text(text)


def load(path):
    """Return ``(model, header, arrays)``."""
    header, arrays = loads(Path(path).read_text())
    return model_from_state(header, arrays), header, arrays


def spec_summary(header: dict) -> str:
    if "spec" not in header:
        return header["family"]
    spec = json.loads(header["spec"])
    parts = []
    for ls in spec["layers"]:
        if ls["kind"] == "dropout":
            parts.append(f"Dropout({ls['rate']})")
        else:
            name = ls["kind"].upper() if ls["kind"] != "dense" else "Dense"
            if ls.get("bidirectional"):
                name = "Bi" + name
            parts.append(f"{name}({ls['units']})")
    return " -> ".join(parts)
