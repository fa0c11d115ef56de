"""Feature selection, min-max scaling and window construction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import SENSOR_NAMES, FleetData

CYCLE_FEATURE = "cycle_norm"
DEFAULT_WINDOW = 50

# FD001's s6 toggles between two readings 0.01 apart (variance ~2e-6); the
# least variable informative sensor (s15) sits near 1e-3.
DEFAULT_MIN_VARIANCE = 1e-4


class AllConstant(ValueError):
    pass


def select_features(train: FleetData, min_variance: float = DEFAULT_MIN_VARIANCE) -> list[str]:
    """Names of the model inputs: the cycle channel plus every varying sensor.

    A sensor is kept when its population variance over all training rows
    exceeds ``min_variance`` (raw units).
    """
    rows = train.stacked()
    if len(rows) == 0:
        raise ValueError("training fleet is empty")
    sensors = rows[:, 5:]
    keep = [name for name, v in zip(SENSOR_NAMES, sensors.var(axis=0)) if v > min_variance]
    if not keep:
        raise AllConstant("every sensor is constant over the training data")
    return [CYCLE_FEATURE] + keep


def _column(name: str) -> int:
    if name == CYCLE_FEATURE:
        return 1
    return 5 + SENSOR_NAMES.index(name)


def raw_features(unit: np.ndarray, names: list[str]) -> np.ndarray:
    """Pick the named columns out of one unit's ``(n, 26)`` record array."""
    return unit[:, [_column(n) for n in names]]


@dataclass(frozen=True)
class NormStats:
    names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if np.any(self.mins > self.maxs):
            raise ValueError("min exceeds max")

    def __eq__(self, other):
        return (
            isinstance(other, NormStats)
            and self.names == other.names
            and np.array_equal(self.mins, other.mins)
            and np.array_equal(self.maxs, other.maxs)
        )

    def to_text(self) -> str:
        lines = [f"features={','.join(self.names)}"]
        for n, lo, hi in zip(self.names, self.mins, self.maxs):
            lines.append(f"{n}.min={float(lo)!r}")
            lines.append(f"{n}.max={float(hi)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NormStats":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                k, v = line.split("=", 1)
                kv[k] = v
        names = tuple(kv["features"].split(","))
        mins = np.array([float(kv[f"{n}.min"]) for n in names])
        maxs = np.array([float(kv[f"{n}.max"]) for n in names])
        return cls(names, mins, maxs)


def fit_minmax(x: np.ndarray, names=None) -> NormStats:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("need a non-empty 2-D matrix")
    if names is None:
        names = [f"f{i}" for i in range(x.shape[1])]
    return NormStats(tuple(names), x.min(axis=0), x.max(axis=0))


def apply_minmax(x, stats: NormStats) -> np.ndarray:
    """Scale to ``[0, 1]`` on the fitted range; no clamping outside it.

    Constant features (max == min) map to 0.
    """
    x = np.asarray(x, dtype=float)
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (x - stats.mins) / safe, 0.0)


def invert_minmax(z, stats: NormStats) -> np.ndarray:
    return np.asarray(z, dtype=float) * (stats.maxs - stats.mins) + stats.mins


@dataclass
class FeatureMatrix:
    x: np.ndarray
    y: np.ndarray
    unit_ids: np.ndarray
    cycles: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("row count must equal label count")

    def __len__(self):
        return len(self.y)


@dataclass
class SequenceTensor:
    """Windows of shape ``(n_windows, window_len, n_features)``.

    ``y``, ``unit_ids`` and ``end_cycles`` describe each window's final cycle.
    """

    x: np.ndarray
    y: np.ndarray
    unit_ids: np.ndarray
    end_cycles: np.ndarray

    def __len__(self):
        return len(self.y)

    @classmethod
    def empty(cls, window: int, n_features: int) -> "SequenceTensor":
        return cls(
            np.empty((0, window, n_features)),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
        )

    @classmethod
    def concat(cls, parts: list["SequenceTensor"]) -> "SequenceTensor":
        return cls(
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.unit_ids for p in parts]),
            np.concatenate([p.end_cycles for p in parts]),
        )


def make_windows(series: np.ndarray, labels: np.ndarray, window: int = DEFAULT_WINDOW,
                 unit_id: int = 0) -> SequenceTensor:
    """All contiguous windows of one unit; window k covers cycles k..k+window-1."""
    n, d = series.shape
    count = max(0, n - window + 1)
    if count == 0:
        return SequenceTensor.empty(window, d)
    # sliding_window_view puts the window axis last
    x = np.lib.stride_tricks.sliding_window_view(series, window, axis=0)
    x = np.ascontiguousarray(x.transpose(0, 2, 1))
    ends = np.arange(window, n + 1)
    return SequenceTensor(
        x,
        np.asarray(labels[window - 1 :], dtype=np.int64),
        np.full(count, unit_id, dtype=np.int64),
        ends.astype(np.int64),
    )


def last_window(series: np.ndarray, labels: np.ndarray, window: int = DEFAULT_WINDOW,
                unit_id: int = 0) -> SequenceTensor | None:
    """The final ``window`` cycles of a unit, or ``None`` when the unit is too short."""
    n, _ = series.shape
    if n < window:
        return None
    return SequenceTensor(
        series[n - window :][None].copy(),
        np.array([labels[-1]], dtype=np.int64),
        np.array([unit_id], dtype=np.int64),
        np.array([n], dtype=np.int64),
    )
