"""From parsed fleets to model-ready arrays, and model training by family name."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import features as F
from .baselines import (CLASSIC_FAMILIES, ForestConfig, GbmConfig, KnnClassifier, KnnConfig,
                        fit_forest, fit_gbm, fit_gnb)
from .ingest import FleetData
from .labels import LabelConfig, unit_targets
from .recurrent import DEEP_FAMILIES, fit, network_spec, train_config

FAMILIES = DEEP_FAMILIES + CLASSIC_FAMILIES
SPLITS = ("native", "holdout")
HOLDOUT_FRACTION = 0.2


@dataclass
class UnitSeries:
    x: np.ndarray  # (n_cycles, n_features), normalized
    rul: np.ndarray
    label: np.ndarray


@dataclass
class Prepared:
    """Normalized per-unit series for the training and evaluation sides.

    ``eval_mode`` is ``"last"`` for the native test split (one window /
    row per unit, at its last observed cycle) and ``"all"`` for the
    unit-level hold-out split.
    """

    names: tuple[str, ...]
    stats: F.NormStats
    train_units: dict[int, UnitSeries]
    eval_units: dict[int, UnitSeries]
    window: int = F.DEFAULT_WINDOW
    eval_mode: str = "last"
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self):
        return len(self.names)

    def train_windows(self) -> F.SequenceTensor:
        parts = [F.make_windows(u.x, u.label, self.window, uid) for uid, u in self.train_units.items()]
        return F.SequenceTensor.concat(parts) if parts else F.SequenceTensor.empty(self.window, self.n_features)

    def train_rows(self) -> F.FeatureMatrix:
        return _rows(self.train_units, self.names, last_only=False)

    def feature_std(self) -> np.ndarray:
        return self.train_rows().x.std(axis=0)

    def eval_windows(self) -> tuple[F.SequenceTensor, list[int]]:
        """Evaluation windows plus the ids of units too short to yield one."""
        parts, skipped = [], []
        for uid, u in self.eval_units.items():
            if self.eval_mode == "last":
                w = F.last_window(u.x, u.label, self.window, uid)
                if w is None:
                    skipped.append(uid)
                else:
                    parts.append(w)
            else:
                w = F.make_windows(u.x, u.label, self.window, uid)
                if len(w) == 0:
                    skipped.append(uid)
                parts.append(w)
        tensor = F.SequenceTensor.concat(parts) if parts else F.SequenceTensor.empty(self.window, self.n_features)
        return tensor, skipped

    def eval_rows(self) -> F.FeatureMatrix:
        return _rows(self.eval_units, self.names, last_only=self.eval_mode == "last")


def _rows(units, names, last_only):
    xs, ys, us, cs = [], [], [], []
    for uid, u in units.items():
        sl = slice(len(u.x) - 1, None) if last_only else slice(None)
        n = len(u.x[sl])
        xs.append(u.x[sl])
        ys.append(u.label[sl])
        us.append(np.full(n, uid, dtype=np.int64))
        cs.append(np.arange(1, len(u.x) + 1, dtype=np.int64)[sl])
    if not xs:
        return F.FeatureMatrix(np.empty((0, len(names))), np.empty(0, dtype=np.int64),
                               np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), tuple(names))
    return F.FeatureMatrix(np.concatenate(xs), np.concatenate(ys), np.concatenate(us),
                           np.concatenate(cs), tuple(names))


def holdout_units(fleet: FleetData, seed: int, fraction: float = HOLDOUT_FRACTION):
    """Split unit ids into (train, held-out) with a seeded permutation."""
    ids = np.array(list(fleet))
    perm = np.random.default_rng(seed).permutation(len(ids))
    n_out = max(1, int(round(fraction * len(ids))))
    return sorted(ids[perm[n_out:]].tolist()), sorted(ids[perm[:n_out]].tolist())


def prepare(train: FleetData, test: FleetData | None, truth: dict | None,
            label_cfg: LabelConfig = LabelConfig(), window: int = F.DEFAULT_WINDOW,
            split: str = "native", seed: int = 0,
            min_variance: float = F.DEFAULT_MIN_VARIANCE) -> Prepared:
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}")
    if split == "holdout":
        keep, out = holdout_units(train, seed)
        train, evalset, eval_truth, mode = train.subset(keep), train.subset(out), None, "all"
    else:
        if test is None or truth is None:
            raise ValueError("native split needs the test fleet and its RUL table")
        evalset, eval_truth, mode = test, truth, "last"

    names = F.select_features(train, min_variance)
    raw_train = {u: F.raw_features(train[u], names) for u in train}
    stats = F.fit_minmax(np.concatenate(list(raw_train.values())), names)

    def series(fleet, raw, tr):
        targets = unit_targets(fleet, label_cfg, tr)
        return {u: UnitSeries(F.apply_minmax(raw[u], stats), *targets[u]) for u in fleet}

    raw_eval = {u: F.raw_features(evalset[u], names) for u in evalset}
    return Prepared(
        tuple(names), stats,
        series(train, raw_train, None),
        series(evalset, raw_eval, eval_truth),
        window, mode,
        {"split": split, "maxlife": label_cfg.maxlife, "w1": label_cfg.w1},
    )


# -- on-disk form -----------------------------------------------------------

def _series_csv(units: dict[int, UnitSeries], names, comment: str) -> str:
    lines = [f"# {comment}"] if comment else []
    lines.append(",".join(["unit", "cycle", *names, "rul", "label1"]))
    for uid, u in units.items():
        for c, (row, r, l) in enumerate(zip(u.x, u.rul, u.label), start=1):
            lines.append(f"{uid},{c}," + ",".join(repr(float(v)) for v in row) + f",{int(r)},{int(l)}")
    return "\n".join(lines) + "\n"


def _read_series_csv(text: str):
    rows = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = rows[0].split(",")
    names = tuple(header[2:-2])
    per_unit: dict[int, list] = {}
    for line in rows[1:]:
        parts = line.split(",")
        per_unit.setdefault(int(parts[0]), []).append(parts)
    units = {}
    for uid, recs in per_unit.items():
        x = np.array([[float(v) for v in p[2:-2]] for p in recs])
        units[uid] = UnitSeries(x, np.array([int(p[-2]) for p in recs]), np.array([int(p[-1]) for p in recs]))
    return names, units


def write_prepared(prep: Prepared, directory, comment: str = "") -> dict:
    """Write labeled CSVs, normalization stats and a manifest; returns the manifest."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "train_labeled.csv").write_text(_series_csv(prep.train_units, prep.names, comment))
    (d / "eval_labeled.csv").write_text(_series_csv(prep.eval_units, prep.names, comment))
    (d / "norm_stats.txt").write_text((f"# {comment}\n" if comment else "") + prep.stats.to_text())
    windows, skipped = prep.eval_windows()
    manifest = {
        **{k: str(v) for k, v in prep.meta.items()},
        "window": str(prep.window),
        "eval_mode": prep.eval_mode,
        "n_features": str(prep.n_features),
        "features": ",".join(prep.names),
        "train_units": str(len(prep.train_units)),
        "train_rows": str(len(prep.train_rows())),
        "train_windows": str(len(prep.train_windows())),
        "eval_units": str(len(prep.eval_units)),
        "eval_rows": str(len(prep.eval_rows())),
        "eval_windows": str(len(windows)),
        "skipped_units": ",".join(str(u) for u in skipped),
        "skipped_count": str(len(skipped)),
    }
    lines = [f"# {comment}"] if comment else []
    lines += [f"{k}={v}" for k, v in manifest.items()]
    (d / "manifest.txt").write_text("\n".join(lines) + "\n")
    return manifest


def read_manifest(directory) -> dict:
    out = {}
    for line in (Path(directory) / "manifest.txt").read_text().splitlines():
        if line and not line.startswith("#"):
            k, v = line.split("=", 1)
            out[k] = v
    return out


def read_prepared(directory) -> Prepared:
    d = Path(directory)
    manifest = read_manifest(d)
    names, train_units = _read_series_csv((d / "train_labeled.csv").read_text())
    _, eval_units = _read_series_csv((d / "eval_labeled.csv").read_text())
    stats = F.NormStats.from_text((d / "norm_stats.txt").read_text())
    meta = {k: manifest[k] for k in ("split", "maxlife", "w1") if k in manifest}
    return Prepared(names, stats, train_units, eval_units, int(manifest["window"]),
                    manifest["eval_mode"], meta)


# -- training by family name -------------------------------------------------

def train_family(family: str, prep: Prepared, seed: int = 0, **overrides):
    """Fit one model family on the prepared training side.

    Returns ``(model, history)``; ``history`` is ``None`` for per-row models.
    Recognized overrides: ``epochs``, ``batch_size``, ``learning_rate``,
    ``patience``, ``dropout`` (recurrent); ``n_trees``, ``max_depth`` (rf);
    ``k`` (knn); ``n_estimators``, ``gbm_learning_rate`` (gbm).
    """
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if family in DEEP_FAMILIES:
        arch = {k: overrides[k] for k in ("dropout",) if k in overrides}
        spec = network_spec(family, prep.n_features, prep.window, **arch)
        tc = {k: overrides[k] for k in ("epochs", "batch_size", "learning_rate", "patience")
              if k in overrides}
        cfg = train_config(family, seed, **tc)
        tensor = prep.train_windows()
        return fit(spec, tensor.x, tensor.y, cfg, family=family)
    rows = prep.train_rows()
    if family == "rf":
        cfg = ForestConfig(n_trees=overrides.get("n_trees", 100),
                           max_depth=overrides.get("max_depth"), seed=seed)
        return fit_forest(rows.x, rows.y, cfg), None
    if family == "knn":
        return KnnClassifier(rows.x, rows.y, KnnConfig(overrides.get("k", 3))), None
    if family == "nb":
        return fit_gnb(rows.x, rows.y), None
    if family == "gbm":
        cfg = GbmConfig(n_estimators=overrides.get("n_estimators", 20),
                        learning_rate=overrides.get("gbm_learning_rate", 0.5), seed=seed)
        return fit_gbm(rows.x, rows.y, cfg), None
    raise ValueError(f"unknown model family {family!r}")


def evaluation_inputs(family: str, prep: Prepared):
    """(inputs, labels) the given family is scored on."""
    if family in DEEP_FAMILIES:
        tensor, _ = prep.eval_windows()
        return tensor.x, tensor.y
    rows = prep.eval_rows()
    return rows.x, rows.y
