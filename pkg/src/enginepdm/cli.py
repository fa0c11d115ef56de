"""``enginepdm`` command line: prepare, train, evaluate, explain, compare.

Layout under ``--out``::

    prepared/          labeled CSVs, norm_stats.txt, manifest.txt
    models/            <model>_seed<k>.ckpt and <model>_seed<k>_history.csv
    metrics.csv        one row per evaluated checkpoint
    comparison.csv     metrics sorted by accuracy
    explanation_<id>.txt / .json

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint, evaluation
from .config import SUBSETS, ConfigError, RunConfig, load_config
from .explain import ExplainConfig, explain_instance, record_to_json, render_report
from .ingest import IngestError, load_subset
from .pipeline import FAMILIES, evaluation_inputs, prepare, read_prepared, train_family, write_prepared
from .recurrent import DEEP_FAMILIES

log = logging.getLogger("enginepdm")


class UsageError(Exception):
    pass


class RunError(Exception):
    pass


def _prepared_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out) / "prepared"


def _models_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out) / "models"


def _ckpt_path(cfg: RunConfig, model: str | None = None) -> Path:
    return _models_dir(cfg) / f"{model or cfg.model}_seed{cfg.seed}.ckpt"


def _load_prepared(cfg: RunConfig):
    d = _prepared_dir(cfg)
    if not (d / "manifest.txt").is_file():
        raise RunError(f"no prepared data in {d}; run 'enginepdm prepare' first")
    prep = read_prepared(d)
    expected = {"maxlife": str(cfg.maxlife), "w1": str(cfg.w1), "split": cfg.split}
    for k, v in expected.items():
        if prep.meta.get(k) != v:
            raise RunError(f"prepared data has {k}={prep.meta.get(k)} but the config says {v}; "
                           "rerun 'prepare'")
    if prep.window != cfg.window:
        raise RunError(f"prepared data has window={prep.window} but the config says {cfg.window}")
    return prep


# -- commands ----------------------------------------------------------------

def cmd_prepare(cfg: RunConfig) -> dict:
    data_dir = Path(cfg.data_dir)
    if not data_dir.is_dir():
        raise FileNotFoundError(f"missing data directory: {data_dir}")
    train, test, truth = load_subset(data_dir, cfg.subset)
    prep = prepare(train, test, truth, cfg.label_config(), cfg.window, cfg.split, cfg.seed)
    manifest = write_prepared(prep, _prepared_dir(cfg), cfg.provenance())
    log.info("prepared %s: %s features, %s train windows, %s eval windows, %s skipped",
             cfg.subset, manifest["n_features"], manifest["train_windows"],
             manifest["eval_windows"], manifest["skipped_count"])
    return manifest


def cmd_train(cfg: RunConfig) -> Path:
    if cfg.model not in FAMILIES:
        raise UsageError(f"unknown model {cfg.model!r}; choose from {', '.join(FAMILIES)}")
    prep = _load_prepared(cfg)
    model, history = train_family(cfg.model, prep, cfg.seed, **cfg.overrides())
    header = {
        "config_hash": cfg.config_hash(),
        "seed": str(cfg.seed),
        "subset": cfg.subset,
        "window": str(prep.window),
        "features": ",".join(prep.names),
        "n_features": str(prep.n_features),
    }
    path = _ckpt_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    checkpoint.save(path, model, header, {"feature_std": prep.feature_std()})
    if history is not None:
        hist = path.with_name(path.stem + "_history.csv")
        hist.write_text(f"# {cfg.provenance()}\n" + history.to_csv())
        if history.stopped_early:
            log.info("early stopping after epoch %d, best epoch %d", len(history), history.best_epoch)
        else:
            log.info("trained %d epochs, best epoch %d", len(history), history.best_epoch)
        log.info("trainable parameters: %d", model.network.count_params())
    log.info("wrote %s", path)
    return path


def _evaluate_one(path: Path, prep) -> evaluation.MetricsReport:
    model, header, _ = checkpoint.load(path)
    features = header.get("features")
    if features is not None and tuple(features.split(",")) != prep.names:
        raise RunError(f"{path}: checkpoint features do not match the prepared data")
    family = header["family"]
    x, y = evaluation_inputs(family if family in FAMILIES else "rf", prep)
    if family in DEEP_FAMILIES and int(header.get("window", prep.window)) != prep.window:
        raise RunError(f"{path}: checkpoint window does not match the prepared data")
    return evaluation.evaluate(path.stem, y, model.predict(x))


def cmd_evaluate(cfg: RunConfig, checkpoints=()) -> list[evaluation.MetricsReport]:
    prep = _load_prepared(cfg)
    paths = [Path(p) for p in checkpoints] or sorted(_models_dir(cfg).glob("*.ckpt"))
    if not paths:
        raise RunError(f"no checkpoints found in {_models_dir(cfg)}")
    for p in paths:
        if not p.is_file():
            raise FileNotFoundError(f"missing checkpoint: {p}")
    reports = [_evaluate_one(p, prep) for p in paths]
    for r in reports:
        if r.degenerate:
            log.warning("%s: undefined %s reported as 0", r.model, ", ".join(r.degenerate))
    out = Path(cfg.out) / "metrics.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(evaluation.to_csv(reports, cfg.provenance()))
    sys.stdout.write(evaluation.to_text(reports))
    return reports


def cmd_compare(cfg: RunConfig, sources=()) -> list[evaluation.MetricsReport]:
    paths = []
    for s in [Path(s) for s in sources] or [Path(cfg.out)]:
        if s.is_dir():
            paths.extend(sorted(s.glob("metrics*.csv")))
        elif s.is_file():
            paths.append(s)
        else:
            raise FileNotFoundError(f"missing metrics source: {s}")
    if not paths:
        raise RunError("no metrics.csv files to compare")
    reports = [r for p in paths for r in evaluation.from_csv(p.read_text())]
    ranked = evaluation.compare(reports)
    out = Path(cfg.out) / "comparison.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(evaluation.to_csv(ranked, cfg.provenance()))
    table = evaluation.to_text(ranked)
    (Path(cfg.out) / "comparison.txt").write_text(table)
    sys.stdout.write(table)
    return ranked


def cmd_explain(cfg: RunConfig, model_ref: str, sample: int, explained_class: int) -> Path:
    path = Path(model_ref)
    if not path.is_file():
        if model_ref in FAMILIES:
            path = _ckpt_path(cfg, model_ref)
        if not path.is_file():
            raise FileNotFoundError(f"missing checkpoint: {path}")
    model, header, arrays = checkpoint.load(path)
    if "spec" in header or header["family"] in DEEP_FAMILIES:
        raise UsageError("recurrent models take windowed sequences and cannot be explained "
                         "per feature row; use rf, knn, nb or gbm")
    prep = _load_prepared(cfg)
    if tuple(header.get("features", ",".join(prep.names)).split(",")) != prep.names:
        raise RunError(f"{path}: checkpoint features do not match the prepared data")
    rows = prep.eval_rows()
    if not 0 <= sample < len(rows):
        raise UsageError(f"--sample must lie in [0, {len(rows) - 1}]")
    std = arrays.get("feature_std", prep.feature_std())
    ecfg = ExplainConfig(n_samples=cfg.n_samples, kernel_width=cfg.kernel_width,
                         top_k=cfg.top_k, seed=cfg.seed)
    expl = explain_instance(model, rows.x[sample], std, list(prep.names), ecfg,
                            explained_class, sample, int(rows.y[sample]))
    text, record = render_report(expl)
    record.update({"unit": int(rows.unit_ids[sample]), "cycle": int(rows.cycles[sample]),
                   "checkpoint": path.name, "config_hash": cfg.config_hash(), "seed": cfg.seed})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    txt = out / f"explanation_{sample}.txt"
    txt.write_text(f"# {cfg.provenance()}\n" + text)
    (out / f"explanation_{sample}.json").write_text(record_to_json(record) + "\n")
    sys.stdout.write(text)
    return txt


def cmd_synth(cfg: RunConfig, n_train: int, n_test: int):
    from .synthetic import write_subset

    write_subset(cfg.data_dir, cfg.subset, n_train, n_test, cfg.seed)
    log.info("wrote synthetic %s files to %s", cfg.subset, cfg.data_dir)


# -- argument handling ---------------------------------------------------------

def _common(p: argparse.ArgumentParser, model_help="model family"):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--subset", choices=SUBSETS)
    p.add_argument("--model", help=model_help)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--split", choices=("native", "holdout"))
    p.add_argument("--w1", type=int)
    p.add_argument("--maxlife", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enginepdm",
                                     description="Turbofan failure-horizon classification.")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("prepare", help="label, select and normalize the raw files"))

    p = sub.add_parser("train", help="fit one model family")
    _common(p)
    for name, kind in (("epochs", int), ("batch-size", int), ("learning-rate", float),
                       ("patience", int), ("dropout", float), ("n-trees", int),
                       ("max-depth", int), ("k", int), ("n-estimators", int),
                       ("gbm-learning-rate", float)):
        p.add_argument(f"--{name}", type=kind)

    p = sub.add_parser("evaluate", help="score checkpoints on the evaluation side")
    _common(p)
    p.add_argument("--checkpoint", action="append", default=[],
                   help="checkpoint file (repeatable); default: every checkpoint under OUT/models")

    p = sub.add_parser("compare", help="merge metrics tables, sorted by accuracy")
    _common(p)
    p.add_argument("sources", nargs="*", help="metrics CSV files or directories (default: OUT)")

    p = sub.add_parser("explain", help="local surrogate explanation of one evaluation row")
    _common(p, model_help="checkpoint path, or a family name resolved under OUT/models")
    p.add_argument("--sample", type=int, required=True, help="evaluation row index")
    p.add_argument("--class", dest="explained_class", type=int, choices=(0, 1), default=1)
    p.add_argument("--n-samples", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--kernel-width", type=float)

    p = sub.add_parser("synth", help="write synthetic raw files in the CMAPSS layout")
    _common(p)
    p.add_argument("--n-train", type=int, default=100)
    p.add_argument("--n-test", type=int, default=100)
    return parser


_CONFIG_KEYS = ("data_dir", "subset", "seed", "out", "split", "w1", "maxlife", "window",
                "epochs", "batch_size", "learning_rate", "patience", "dropout", "n_trees",
                "max_depth", "k", "n_estimators", "gbm_learning_rate", "n_samples", "top_k",
                "kernel_width")


def _config_from_args(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if args.command != "explain":
        overrides["model"] = args.model
    return load_config(args.config, **overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s",
                        stream=sys.stderr, force=True)
    log.setLevel(logging.INFO)
    # per-epoch progress only when asked for
    logging.getLogger("enginepdm.recurrent").setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _config_from_args(args)
        if args.command == "prepare":
            cmd_prepare(cfg)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "evaluate":
            cmd_evaluate(cfg, args.checkpoint)
        elif args.command == "compare":
            cmd_compare(cfg, args.sources)
        elif args.command == "explain":
            if args.model is None:
                raise UsageError("explain needs --model <checkpoint or family>")
            cmd_explain(cfg, args.model, args.sample, args.explained_class)
        elif args.command == "synth":
            cmd_synth(cfg, args.n_train, args.n_test)
    except (UsageError, ConfigError) as e:
        print(f"enginepdm: usage error: {e}", file=sys.stderr)
        return 2
    except (RunError, OSError, IngestError, ValueError, KeyError,
            np.linalg.LinAlgError, FloatingPointError, json.JSONDecodeError) as e:
        print(f"enginepdm: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
