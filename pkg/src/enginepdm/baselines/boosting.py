"""Gradient boosting for binomial deviance with Newton-step leaves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import _check_xy
from .tree import DecisionTree

RATE_CLIP = 1e-12


@dataclass(frozen=True)
class GbmConfig:
    n_estimators: int = 20
    learning_rate: float = 0.5
    max_depth: int = 2
    max_features: int | None = 2
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.n_estimators < 0:
            raise ValueError("n_estimators must be >= 0")


def _proba(base_rate, score):
    # sigmoid(logit(base_rate) + score); returns base_rate exactly when score == 0
    with np.errstate(over="ignore"):
        return base_rate / (base_rate + (1.0 - base_rate) * np.exp(-score))


class GbmClassifier:
    family = "gbm"
    threshold = 0.5

    def __init__(self, base_rate, trees, n_features, config: GbmConfig):
        self.base_rate = float(base_rate)
        self.trees = trees
        self.n_features = n_features
        self.config = config

    @property
    def init_score(self) -> float:
        return float(np.log(self.base_rate / (1.0 - self.base_rate)))

    def decision_function(self, X) -> np.ndarray:
        """Additive score on top of the base-rate log-odds."""
        X = np.asarray(X, dtype=float)
        score = np.zeros(len(X))
        for t in self.trees:
            score += self.config.learning_rate * t.predict_value(X)[:, 0]
        return score

    def predict_proba(self, X) -> np.ndarray:
        return _proba(self.base_rate, self.decision_function(X))

    def predict(self, X):
        return (self.predict_proba(X) >= self.threshold).astype(np.int64)


def fit_gbm(X, y, cfg: GbmConfig = GbmConfig()) -> GbmClassifier:
    """Stagewise squared-error trees on the deviance's negative gradient ``y - p``.

    Each leaf takes one Newton step, ``sum(y - p) / sum(p (1 - p))``.
    """
    X, y = _check_xy(X, y)
    base = float(np.clip(y.mean(), RATE_CLIP, 1.0 - RATE_CLIP))
    rng = np.random.default_rng(cfg.seed)
    score = np.zeros(len(y))
    trees = []
    for _ in range(cfg.n_estimators):
        p = _proba(base, score)
        resid = y - p
        hess = p * (1.0 - p)

        def newton(idx, resid=resid, hess=hess):
            den = hess[idx].sum()
            return np.array([resid[idx].sum() / den if den > 1e-150 else 0.0])

        tree = DecisionTree("mse", cfg.max_depth, cfg.max_features, rng=rng)
        tree.fit(X, resid, leaf_value=newton)
        trees.append(tree)
        score += cfg.learning_rate * tree.predict_value(X)[:, 0]
    return GbmClassifier(base, trees, X.shape[1], cfg)
