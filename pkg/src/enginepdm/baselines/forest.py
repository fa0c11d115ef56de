from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import DecisionTree


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    bootstrap: bool = True
    max_features: int | None = None  # None: floor(sqrt(d))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise EmptyDataset("no training rows")
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one label per row")
    return X, y


class ForestClassifier:
    """Bagged Gini trees; probability is the mean of per-tree leaf frequencies."""

    family = "rf"
    threshold = 0.5

    def __init__(self, trees, n_features, config: ForestConfig):
        self.trees = trees
        self.n_features = n_features
        self.config = config

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros(len(X))
        for t in self.trees:
            total += t.predict_value(X)[:, 1]
        return total / len(self.trees)

    def predict(self, X):
        return (self.predict_proba(X) >= self.threshold).astype(np.int64)


def fit_forest(X, y, cfg: ForestConfig = ForestConfig()) -> ForestClassifier:
    X, y = _check_xy(X, y)
    n, d = X.shape
    max_features = cfg.max_features or max(1, int(math.sqrt(d)))
    trees = []
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
        tree = DecisionTree("gini", cfg.max_depth, max_features, rng=rng)
        trees.append(tree.fit(X[rows], y[rows]))
    return ForestClassifier(trees, d, cfg)
