"""Synthetic run-to-failure fleets written in the CMAPSS file layout.

Not a stand-in for the real dataset: a small exponential-wear simulator
that reproduces the file format, the count and roles of the columns
(three settings, seven flat or near-flat sensors, fourteen drifting ones)
and plausible unit lengths, so the pipeline can run end to end without
the NASA files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import N_SENSORS, FleetData, format_cycles

# (baseline, drift at failure, noise sd) per sensor; drift 0 with noise 0 is flat
_SENSORS = {
    1: (518.67, 0.0, 0.0), 2: (642.2, 1.6, 0.35), 3: (1583.0, 22.0, 5.0),
    4: (1398.0, 32.0, 7.0), 5: (14.62, 0.0, 0.0), 7: (554.6, -3.2, 0.6),
    8: (2388.03, 0.22, 0.05), 9: (9050.0, 45.0, 15.0), 10: (1.3, 0.0, 0.0),
    11: (47.3, 1.1, 0.2), 12: (522.2, -2.8, 0.5), 13: (2388.03, 0.22, 0.05),
    14: (8135.0, 25.0, 12.0), 15: (8.41, 0.13, 0.03), 16: (0.03, 0.0, 0.0),
    17: (391.5, 4.5, 1.1), 18: (2388.0, 0.0, 0.0), 19: (100.0, 0.0, 0.0),
    20: (38.95, -0.65, 0.13), 21: (23.37, -0.38, 0.08),
}
_S6 = (21.61, 21.60, 0.02)  # two-level sensor: usual value, rare value, rare rate


def _unit(rng, uid, life):
    t = np.arange(1, life + 1)
    rate = rng.uniform(3.0, 6.0)
    wear = (np.exp(rate * t / life) - 1.0) / (np.exp(rate) - 1.0)
    offset = rng.uniform(0.0, 0.08)
    rows = np.empty((life, 26))
    rows[:, 0] = uid
    rows[:, 1] = t
    rows[:, 2] = np.round(rng.normal(0.0, 0.0022, life), 4)
    rows[:, 3] = np.round(rng.normal(0.0, 0.0003, life), 4)
    rows[:, 4] = 100.0
    for s in range(1, N_SENSORS + 1):
        if s == 6:
            usual, rare, p = _S6
            rows[:, 4 + s] = np.where(rng.random(life) < p, rare, usual)
            continue
        base, drift, sd = _SENSORS[s]
        vals = base + drift * (offset + wear) + rng.normal(0.0, sd, life) if sd else np.full(life, base)
        rows[:, 4 + s] = np.round(vals, 4)
    return rows


def generate_fleet(n_units: int = 100, seed: int = 0, min_life: int = 128, max_life: int = 362):
    """Full run-to-failure trajectories for ``n_units`` engines."""
    rng = np.random.default_rng(seed)
    lives = rng.integers(min_life, max_life + 1, n_units)
    return FleetData({u: _unit(rng, u, int(L)) for u, L in zip(range(1, n_units + 1), lives)})


def truncate_fleet(fleet: FleetData, seed: int = 0, min_cycles: int = 31):
    """Cut each unit at a random point; returns ``(truncated fleet, true final RUL)``."""
    rng = np.random.default_rng(seed)
    units, truth = {}, {}
    for uid in fleet:
        n = len(fleet[uid])
        cut = int(np.clip(round(n * rng.uniform(0.3, 0.97)), min(min_cycles, n), n))
        units[uid] = fleet[uid][:cut]
        truth[uid] = n - cut
    return FleetData(units), truth


def write_subset(directory, subset: str = "FD001", n_train: int = 100, n_test: int = 100,
                 seed: int = 0):
    """Write ``train_/test_/RUL_<subset>.txt`` with CMAPSS's trailing-space quirk."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    train = generate_fleet(n_train, seed)
    test, truth = truncate_fleet(generate_fleet(n_test, seed + 1), seed + 2)

    def quirk(text):
        return "".join(line + "  \n" for line in text.splitlines())

    (d / f"train_{subset}.txt").write_text(quirk(format_cycles(train)))
    (d / f"test_{subset}.txt").write_text(quirk(format_cycles(test)))
    (d / f"RUL_{subset}.txt").write_text("".join(f"{truth[u]} \n" for u in sorted(truth)))
    return train, test, truth
