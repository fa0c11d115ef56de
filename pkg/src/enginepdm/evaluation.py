"""Confusion counts, binary metrics and multi-model comparison tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    model: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    n: int
    # names of metrics whose denominator was zero (reported as 0)
    degenerate: tuple[str, ...] = field(default=())


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.shape} vs {p.shape}")
    return ConfusionMatrix(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == 0) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        tn=int(np.sum((t == 0) & (p == 0))),
    )


def metrics(cm: ConfusionMatrix, model: str = "") -> MetricsReport:
    """Accuracy, precision, recall and F1 for the positive class.

    Zero denominators give 0 and are listed in ``degenerate``.
    """
    flags = []

    def ratio(num, den, name):
        if den == 0:
            flags.append(name)
            return 0.0
        return num / den

    acc = ratio(cm.tp + cm.tn, cm.total, "accuracy")
    prec = ratio(cm.tp, cm.tp + cm.fp, "precision")
    rec = ratio(cm.tp, cm.tp + cm.fn, "recall")
    f1 = ratio(2.0 * prec * rec, prec + rec, "f1")
    return MetricsReport(model, acc, prec, rec, f1, cm.total, tuple(flags))


def evaluate(model_id: str, y_true, y_pred) -> MetricsReport:
    return metrics(confusion(y_true, y_pred), model_id)


METRIC_COLUMNS = ("model", "accuracy", "precision", "recall", "f1", "n")


def compare(reports) -> list[MetricsReport]:
    """Sort by accuracy (descending), ties by model id."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to compare")
    return sorted(reports, key=lambda r: (-r.accuracy, r.model))


def to_csv(reports, header_comment: str | None = None) -> str:
    lines = [f"# {header_comment}"] if header_comment else []
    lines.append(",".join(METRIC_COLUMNS))
    for r in reports:
        lines.append(f"{r.model},{r.accuracy!r},{r.precision!r},{r.recall!r},{r.f1!r},{r.n}")
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> list[MetricsReport]:
    rows = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not rows or tuple(rows[0].split(",")) != METRIC_COLUMNS:
        raise ValueError("not a metrics table")
    out = []
    for line in rows[1:]:
        m, a, p, r, f, n = line.split(",")
        out.append(MetricsReport(m, float(a), float(p), float(r), float(f), int(n)))
    return out


def to_text(reports) -> str:
    """Aligned plain-text table, accuracy shown in percent."""
    head = f"{'model':<16}{'accuracy(%)':>12}{'precision':>11}{'recall':>9}{'f1':>8}{'n':>7}"
    lines = [head, "-" * len(head)]
    for r in reports:
        lines.append(
            f"{r.model:<16}{100 * r.accuracy:>12.2f}{r.precision:>11.3f}"
            f"{r.recall:>9.3f}{r.f1:>8.3f}{r.n:>7d}"
        )
    return "\n".join(lines) + "\n"
