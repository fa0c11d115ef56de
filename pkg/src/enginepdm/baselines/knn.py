from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import EmptyDataset


@dataclass(frozen=True)
class KnnConfig:
    k: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _sq_distances(X, Q, max_bytes=64 * 2**20):
    out = np.empty((len(Q), len(X)))
    step = max(1, max_bytes // max(1, X.size * 8))
    for i in range(0, len(Q), step):
        diff = Q[i : i + step, None, :] - X[None, :, :]
        out[i : i + step] = np.einsum("qnd,qnd->qn", diff, diff)
    return out


def nearest(X, Q, k):
    """Indices of the k nearest training rows per query, ties to the lower index."""
    d2 = _sq_distances(X, Q)
    out = np.empty((len(Q), k), dtype=np.int64)
    for i, row in enumerate(d2):
        kth = np.partition(row, k - 1)[k - 1]
        cand = np.flatnonzero(row <= kth)  # ascending index order
        out[i] = cand[np.argsort(row[cand], kind="stable")[:k]]
    return out


class KnnClassifier:
    """Lazy learner: stores the (normalized) training rows verbatim."""

    family = "knn"
    threshold = 0.5

    def __init__(self, X, y, config: KnnConfig = KnnConfig()):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise EmptyDataset("no training rows")
        if config.k > len(X):
            raise ValueError("k exceeds the number of training rows")
        self.X, self.y, self.config = X, y, config
        self.n_features = X.shape[1]

    def predict_proba(self, Q) -> np.ndarray:
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        idx = nearest(self.X, Q, self.config.k)
        return self.y[idx].mean(axis=1)

    def predict(self, Q):
        return (self.predict_proba(Q) >= self.threshold).astype(np.int64)


def knn_predict(X, y, Q, cfg: KnnConfig = KnnConfig()) -> np.ndarray:
    """Vote fraction for class 1 among the k nearest rows (Euclidean)."""
    return KnnClassifier(X, y, cfg).predict_proba(Q)
