"""Local surrogate explanations for per-row classifiers.

An instance is perturbed with Gaussian noise scaled by each feature's
training spread, the black box scores every perturbation, and a
proximity-weighted ridge regression is fitted to those scores. Its
coefficients, scaled by the feature spread, are the reported
contributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class SingularSystem(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ExplainConfig:
    n_samples: int = 5000
    kernel_width: float | None = None  # None: 0.75 * sqrt(n_features)
    ridge: float = 1e-3
    top_k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 100:
            raise ValueError("n_samples must be >= 100")
        if self.ridge < 0:
            raise ValueError("ridge strength must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def width(self, n_features: int) -> float:
        if self.kernel_width is not None:
            return float(self.kernel_width)
        return 0.75 * math.sqrt(n_features)


@dataclass(frozen=True)
class Explanation:
    instance_id: int
    explained_class: int
    probabilities: tuple[float, float]
    intercept: float
    weights: tuple[tuple[str, float], ...]
    fidelity: float
    true_label: int | None = None
    model: str = ""

    def direction(self, weight: float) -> str:
        c = self.explained_class if weight > 0 else 1 - self.explained_class
        return f"increases chance of class {c}"

    @property
    def predicted_class(self) -> int:
        return int(self.probabilities[1] >= 0.5)

    def to_record(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "model": self.model,
            "explained_class": self.explained_class,
            "true_label": self.true_label,
            "probabilities": list(self.probabilities),
            "intercept": self.intercept,
            "weights": [[n, w] for n, w in self.weights],
            "directions": [self.direction(w) for _, w in self.weights],
            "fidelity": self.fidelity,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Explanation":
        return cls(
            instance_id=int(rec["instance_id"]),
            explained_class=int(rec["explained_class"]),
            probabilities=tuple(float(p) for p in rec["probabilities"]),
            intercept=float(rec["intercept"]),
            weights=tuple((str(n), float(w)) for n, w in rec["weights"]),
            fidelity=float(rec["fidelity"]),
            true_label=None if rec.get("true_label") is None else int(rec["true_label"]),
            model=rec.get("model", ""),
        )


def perturb(instance, std, cfg: ExplainConfig) -> np.ndarray:
    """``cfg.n_samples`` Gaussian draws around ``instance``; row 0 is the instance itself."""
    x = np.asarray(instance, dtype=float)
    std = np.asarray(std, dtype=float)
    if x.shape != std.shape:
        raise ValueError("instance and std dimensions differ")
    rng = np.random.default_rng(cfg.seed)
    z = x + rng.standard_normal((cfg.n_samples, x.size)) * std
    z[0] = x
    return z


def kernel_weights(z, instance, width: float) -> np.ndarray:
    d2 = np.sum((np.asarray(z) - np.asarray(instance)) ** 2, axis=1)
    return np.exp(-d2 / width**2)


def fit_surrogate(z, target, weights, ridge: float = 1e-3):
    """Weighted ridge regression (intercept unpenalized) via the normal equations.

    Minimizes ``sum_i w_i (f_i - b0 - b.z_i)^2 + ridge * |b|^2``;
    returns ``(b0, b)``.
    """
    z = np.asarray(z, dtype=float)
    f = np.asarray(target, dtype=float)
    w = np.asarray(weights, dtype=float)
    A = np.hstack([np.ones((len(z), 1)), z])
    Aw = A * w[:, None]
    gram = Aw.T @ A
    gram[np.arange(1, A.shape[1]), np.arange(1, A.shape[1])] += ridge
    if np.linalg.cond(gram) > 1e12:
        raise SingularSystem("surrogate normal equations are singular")
    beta = np.linalg.solve(gram, Aw.T @ f)
    return float(beta[0]), beta[1:]


def weighted_r2(z, target, weights, intercept, coef) -> float:
    f = np.asarray(target, dtype=float)
    w = np.asarray(weights, dtype=float)
    pred = intercept + np.asarray(z) @ coef
    mean = np.sum(w * f) / np.sum(w)
    ss_tot = np.sum(w * (f - mean) ** 2)
    ss_res = np.sum(w * (f - pred) ** 2)
    if ss_tot <= 1e-300:
        return 1.0 if ss_res <= 1e-300 else 0.0
    return float(1.0 - ss_res / ss_tot)


def explain_instance(model, instance, feature_std, feature_names, cfg: ExplainConfig = ExplainConfig(),
                     explained_class: int = 1, instance_id: int = 0,
                     true_label: int | None = None) -> Explanation:
    """Explain one row of a classifier exposing ``predict_proba`` (positive class).

    Features are ranked by ``|coef * std|`` and reported with that signed
    value; features with zero spread never appear.
    """
    if explained_class not in (0, 1):
        raise ValueError("explained_class must be 0 or 1")
    x = np.asarray(instance, dtype=float)
    std = np.asarray(feature_std, dtype=float)
    if len(feature_names) != x.size:
        raise ValueError("one name per feature required")
    z = perturb(x, std, cfg)
    p1 = np.asarray(model.predict_proba(z), dtype=float)
    target = p1 if explained_class == 1 else 1.0 - p1
    w = kernel_weights(z, x, cfg.width(x.size))
    b0, coef = fit_surrogate(z, target, w, cfg.ridge)
    contrib = coef * std
    order = np.argsort(-np.abs(contrib), kind="stable")
    top = [(feature_names[j], float(contrib[j])) for j in order if contrib[j] != 0.0][: cfg.top_k]
    return Explanation(
        instance_id=instance_id,
        explained_class=explained_class,
        probabilities=(float(1.0 - p1[0]), float(p1[0])),
        intercept=b0,
        weights=tuple(top),
        fidelity=weighted_r2(z, target, w, b0, coef),
        true_label=true_label,
        model=getattr(model, "family", ""),
    )


def _confidence_tier(p: float) -> str:
    if p >= 0.9:
        return "high"
    if p >= 0.5:
        return "moderate"
    return "low"


def render_report(expl: Explanation) -> tuple[str, dict]:
    """Plain-text report with signed bars, plus the JSON-ready record."""
    c = expl.explained_class
    pc = expl.probabilities[c]
    lines = [
        f"Explanation of instance {expl.instance_id}" + (f" ({expl.model})" if expl.model else ""),
        f"prediction probabilities: class 0 = {expl.probabilities[0]:.3f}, "
        f"class 1 = {expl.probabilities[1]:.3f}",
        f"predicted class: {expl.predicted_class}",
        f"confidence in class {c}: {pc:.2f} ({_confidence_tier(pc)})",
    ]
    if expl.true_label is not None:
        verdict = "correct" if expl.predicted_class == expl.true_label else "MISCLASSIFIED"
        lines.append(f"true label: {expl.true_label} -> {verdict}")
    lines.append(f"surrogate: intercept {expl.intercept:+.4f}, weighted R^2 {expl.fidelity:.3f}")
    lines.append("feature contributions:")
    scale = max((abs(w) for _, w in expl.weights), default=0.0) or 1.0
    for name, w in expl.weights:
        bar = ("+" if w > 0 else "-") * max(1, round(20 * abs(w) / scale))
        lines.append(f"  {name:<12}{w:+.5f}  {bar:<20}  {expl.direction(w)}")
    return "\n".join(lines) + "\n", expl.to_record()


def record_to_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True)
