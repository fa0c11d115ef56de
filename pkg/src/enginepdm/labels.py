"""Remaining-useful-life targets and the binary failure label."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import FleetData


class MissingRulEntry(KeyError):
    pass


@dataclass(frozen=True)
class LabelConfig:
    """RUL plateau (``maxlife``) and failure horizon ``w1`` in cycles.

    ``label1`` is 1 when the clipped RUL is at most ``w1``.
    """

    maxlife: int = 130
    w1: int = 30

    def __post_init__(self):
        if self.maxlife < 1 or self.w1 < 1:
            raise ValueError("maxlife and w1 must be positive")
        if self.w1 >= self.maxlife:
            raise ValueError("w1 must be smaller than maxlife")


@dataclass(frozen=True)
class LabeledCycle:
    unit_id: int
    cycle: int
    features: tuple[float, ...]
    rul: int
    label1: int


def _unit_rul(n_cycles: int, final_rul: int) -> np.ndarray:
    # cycle c (1-based) of an n-cycle unit is n - c cycles before the last observation
    return final_rul + (n_cycles - np.arange(1, n_cycles + 1))


def compute_train_rul(fleet: FleetData) -> dict[tuple[int, int], int]:
    """Run-to-failure units: RUL = max_cycle - cycle."""
    out = {}
    for uid in fleet:
        for c, r in enumerate(_unit_rul(len(fleet[uid]), 0), start=1):
            out[(uid, c)] = int(r)
    return out


def compute_test_rul(fleet: FleetData, truth: dict[int, int]) -> dict[tuple[int, int], int]:
    """Truncated units: RUL = true final RUL + (max_cycle - cycle)."""
    out = {}
    for uid in fleet:
        if uid not in truth:
            raise MissingRulEntry(f"no ground-truth RUL for unit {uid}")
        for c, r in enumerate(_unit_rul(len(fleet[uid]), truth[uid]), start=1):
            out[(uid, c)] = int(r)
    return out


def clip_rul(rul, cfg: LabelConfig):
    """Cap RUL at ``cfg.maxlife``; works on ints and arrays alike."""
    if np.ndim(rul) == 0:
        return cfg.maxlife if rul >= cfg.maxlife else int(rul)
    return np.minimum(rul, cfg.maxlife)


def binarize(rul, cfg: LabelConfig):
    if np.ndim(rul) == 0:
        return 1 if rul <= cfg.w1 else 0
    return (np.asarray(rul) <= cfg.w1).astype(np.int64)


def unit_targets(fleet: FleetData, cfg: LabelConfig, truth: dict[int, int] | None = None):
    """Per-unit ``(clipped_rul, label1)`` integer arrays aligned with cycle rows.

    With ``truth`` absent every unit is treated as run-to-failure.
    """
    out = {}
    for uid in fleet:
        if truth is None:
            final = 0
        elif uid in truth:
            final = truth[uid]
        else:
            raise MissingRulEntry(f"no ground-truth RUL for unit {uid}")
        rul = clip_rul(_unit_rul(len(fleet[uid]), final), cfg).astype(np.int64)
        out[uid] = (rul, binarize(rul, cfg))
    return out


def labeled_cycles(fleet: FleetData, cfg: LabelConfig, truth=None) -> list[LabeledCycle]:
    targets = unit_targets(fleet, cfg, truth)
    out = []
    for uid in fleet:
        rul, lab = targets[uid]
        for row, r, l in zip(fleet[uid], rul, lab):
            out.append(LabeledCycle(uid, int(row[1]), tuple(row[2:]), int(r), int(l)))
    return out
