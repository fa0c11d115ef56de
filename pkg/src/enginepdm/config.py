"""Run configuration: flat ``key=value`` files with command-line overrides.

A config file holds one ``key = value`` per line; ``#`` starts a comment
and blank lines are ignored. Keys are the :class:`RunConfig` field names.
Values given on the command line replace file values.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .features import DEFAULT_WINDOW
from .labels import LabelConfig

SUBSETS = ("FD001", "FD002", "FD003", "FD004")

# Keys left out of the hash: where files live does not change what is computed.
_UNHASHED = ("data_dir", "out")


class ConfigError(ValueError):
    """Unknown key, unparsable value or out-of-range setting."""


@dataclass(frozen=True)
class RunConfig:
    subset: str = "FD001"
    data_dir: str = "data"
    out: str = "runs"
    maxlife: int = 130
    w1: int = 30
    window: int = DEFAULT_WINDOW
    split: str = "native"
    seed: int = 0
    model: str = "gru"
    # training overrides; None keeps the family default
    epochs: int | None = None
    batch_size: int | None = None
    learning_rate: float | None = None
    patience: int | None = None
    dropout: float | None = None
    n_trees: int | None = None
    max_depth: int | None = None
    k: int | None = None
    n_estimators: int | None = None
    gbm_learning_rate: float | None = None
    # explainer
    n_samples: int = 5000
    top_k: int = 10
    kernel_width: float | None = None

    def __post_init__(self):
        if self.subset not in SUBSETS:
            raise ConfigError(f"subset must be one of {', '.join(SUBSETS)}")
        if self.split not in ("native", "holdout"):
            raise ConfigError("split must be 'native' or 'holdout'")
        if self.window < 1:
            raise ConfigError("window must be positive")
        try:
            self.label_config()
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def label_config(self) -> LabelConfig:
        return LabelConfig(maxlife=self.maxlife, w1=self.w1)

    def overrides(self) -> dict:
        names = ("epochs", "batch_size", "learning_rate", "patience", "dropout", "n_trees",
                 "max_depth", "k", "n_estimators", "gbm_learning_rate")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(self).items())

    def config_hash(self) -> str:
        """First 16 hex digits of the SHA-256 of the canonical text (paths excluded)."""
        canon = "".join(f"{k}={_fmt(v)}\n" for k, v in sorted(asdict(self).items())
                        if k not in _UNHASHED)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def provenance(self) -> str:
        return f"config_hash={self.config_hash()} seed={self.seed}"


def _fmt(v) -> str:
    return "none" if v is None else repr(v) if isinstance(v, float) else str(v)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    if "None" in kind and raw.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.split(' ')[0]}") from None
    return raw


def parse_config_text(text: str) -> dict:
    values = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path=None, **overrides) -> RunConfig:
    """Defaults, then the file at ``path`` (if any), then non-None ``overrides``."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"missing config file: {p}")
        values.update(parse_config_text(p.read_text()))
    for k, v in overrides.items():
        if k not in _TYPES:
            raise ConfigError(f"unknown setting {k!r}")
        if v is not None:
            values[k] = v
    return replace(RunConfig(), **values)
