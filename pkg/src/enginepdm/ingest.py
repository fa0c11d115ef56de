"""Readers for CMAPSS-format turbofan files.

Training and test files carry 26 whitespace-separated columns per line:
unit id, cycle, three operational settings and 21 sensor readings. The
ground-truth RUL file carries a single integer per line, line ``i``
belonging to test unit ``i``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_SETTINGS = 3
N_SENSORS = 21
N_COLUMNS = 2 + N_SETTINGS + N_SENSORS

SETTING_NAMES = tuple(f"setting{i}" for i in range(1, N_SETTINGS + 1))
SENSOR_NAMES = tuple(f"s{i}" for i in range(1, N_SENSORS + 1))
COLUMN_NAMES = ("unit", "cycle") + SETTING_NAMES + SENSOR_NAMES


class IngestError(ValueError):
    """Base class for malformed input files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WrongColumnCount(IngestError):
    pass


class NonNumericToken(IngestError):
    pass


class NonContiguousCycles(IngestError):
    pass


class NegativeValue(IngestError):
    pass


@dataclass(frozen=True)
class EngineCycle:
    unit_id: int
    cycle: int
    op_settings: tuple[float, float, float]
    sensors: tuple[float, ...]

    def __post_init__(self):
        if len(self.op_settings) != N_SETTINGS or len(self.sensors) != N_SENSORS:
            raise WrongColumnCount(
                f"expected {N_SETTINGS} settings and {N_SENSORS} sensors, got "
                f"{len(self.op_settings)} and {len(self.sensors)}"
            )
        if self.unit_id < 1 or self.cycle < 1:
            raise ValueError("unit_id and cycle must be >= 1")

    @classmethod
    def from_row(cls, row) -> "EngineCycle":
        return cls(
            int(row[0]),
            int(row[1]),
            tuple(float(v) for v in row[2 : 2 + N_SETTINGS]),
            tuple(float(v) for v in row[2 + N_SETTINGS :]),
        )


class FleetData(Mapping):
    """Per-unit cycle records, keyed by unit id in ascending order.

    Each unit is stored as a read-only ``(n_cycles, 26)`` float array whose
    rows are ordered by cycle; the cycle column holds exactly ``1..n``.
    """

    def __init__(self, units: Mapping[int, np.ndarray] | None = None):
        self._units: dict[int, np.ndarray] = {}
        for uid in sorted(units or {}):
            arr = np.array(units[uid], dtype=float)
            if arr.ndim != 2 or arr.shape[1] != N_COLUMNS:
                raise WrongColumnCount(f"unit {uid}: expected {N_COLUMNS} columns")
            cycles = arr[:, 1]
            if not np.array_equal(cycles, np.arange(1, len(arr) + 1)):
                raise NonContiguousCycles(f"unit {uid}: cycles are not 1..{len(arr)}")
            arr.setflags(write=False)
            self._units[int(uid)] = arr

    def __getitem__(self, unit_id: int) -> np.ndarray:
        return self._units[unit_id]

    def __iter__(self) -> Iterator[int]:
        return iter(self._units)

    def __len__(self) -> int:
        return len(self._units)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FleetData):
            return NotImplemented
        return list(self) == list(other) and all(
            np.array_equal(self[u], other[u]) for u in self
        )

    def __repr__(self) -> str:
        return f"FleetData(units={len(self)}, rows={self.n_rows})"

    @property
    def n_rows(self) -> int:
        return sum(len(a) for a in self._units.values())

    def lengths(self) -> dict[int, int]:
        return {u: len(a) for u, a in self._units.items()}

    def cycles(self, unit_id: int) -> list[EngineCycle]:
        return [EngineCycle.from_row(r) for r in self._units[unit_id]]

    def stacked(self) -> np.ndarray:
        """All rows as one ``(n_rows, 26)`` array, units in ascending order."""
        if not self._units:
            return np.empty((0, N_COLUMNS))
        return np.concatenate(list(self._units.values()), axis=0)

    def subset(self, unit_ids: Iterable[int]) -> "FleetData":
        return FleetData({u: self._units[u] for u in unit_ids})


def _lines(source) -> Iterable[str]:
    if isinstance(source, str):
        return source.splitlines()
    return source


def _number(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NonNumericToken(f"not a number: {token!r}", lineno) from None
    if not math.isfinite(value):
        raise NonNumericToken(f"non-finite value: {token!r}", lineno)
    return value


def parse_cycles(source) -> FleetData:
    """Parse a train/test file (text or iterable of lines) into a FleetData."""
    rows: dict[int, list[list[float]]] = {}
    for lineno, line in enumerate(_lines(source), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != N_COLUMNS:
            raise WrongColumnCount(f"expected {N_COLUMNS} columns, got {len(tokens)}", lineno)
        values = [_number(t, lineno) for t in tokens]
        unit, cycle = values[0], values[1]
        if unit != int(unit) or cycle != int(cycle) or unit < 1 or cycle < 1:
            raise NonNumericToken("unit id and cycle must be positive integers", lineno)
        rows.setdefault(int(unit), []).append(values)

    units = {}
    for uid, unit_rows in rows.items():
        arr = np.asarray(unit_rows, dtype=float)
        arr = arr[np.argsort(arr[:, 1], kind="stable")]
        if not np.array_equal(arr[:, 1], np.arange(1, len(arr) + 1)):
            raise NonContiguousCycles(
                f"unit {uid}: cycles must run 1..n without gaps or duplicates"
            )
        units[uid] = arr
    return FleetData(units)


def parse_rul(source) -> dict[int, int]:
    """Parse a ground-truth RUL file; line ``i`` (1-based) is unit ``i``."""
    table: dict[int, int] = {}
    unit = 0
    for lineno, line in enumerate(_lines(source), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 1:
            raise WrongColumnCount(f"expected 1 column, got {len(tokens)}", lineno)
        value = _number(tokens[0], lineno)
        if value != int(value):
            raise NonNumericToken(f"not an integer: {tokens[0]!r}", lineno)
        if value < 0:
            raise NegativeValue(f"negative RUL {tokens[0]}", lineno)
        unit += 1
        table[unit] = int(value)
    return table


def format_cycles(fleet: FleetData) -> str:
    """Serialize back to the whitespace-delimited wire format (lossless)."""
    out = []
    for uid in fleet:
        for row in fleet[uid]:
            head = f"{int(row[0])} {int(row[1])}"
            out.append(head + " " + " ".join(repr(float(v)) for v in row[2:]))
    return "\n".join(out) + ("\n" if out else "")


def _read(path: Path) -> list[str]:
    with open(path) as fh:
        return fh.readlines()


def load_subset(data_dir, subset: str = "FD001"):
    """Load ``train_<subset>.txt``, ``test_<subset>.txt`` and ``RUL_<subset>.txt``."""
    data_dir = Path(data_dir)
    paths = [data_dir / f"{kind}_{subset}.txt" for kind in ("train", "test", "RUL")]
    for p in paths:
        if not p.is_file():
            raise FileNotFoundError(f"missing input file: {p}")
    train = parse_cycles(_read(paths[0]))
    test = parse_cycles(_read(paths[1]))
    truth = parse_rul(_read(paths[2]))
    return train, test, truth
