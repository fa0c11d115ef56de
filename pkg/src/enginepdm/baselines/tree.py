"""CART trees stored as flat preorder node arrays."""

from __future__ import annotations

import numpy as np

LEAF = -1


def _gini_scan(ys: np.ndarray):
    """Weighted child Gini (times n) for every split position of sorted 0/1 labels."""
    n = len(ys)
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    pos_l = np.cumsum(ys)[:-1]
    pos_r = ys.sum() - pos_l
    gl = nl - (pos_l**2 + (nl - pos_l) ** 2) / nl
    gr = nr - (pos_r**2 + (nr - pos_r) ** 2) / nr
    return gl + gr


def _sse_scan(ys: np.ndarray):
    """Children's summed squared error for every split position of sorted targets."""
    n = len(ys)
    nl = np.arange(1, n, dtype=float)
    s_l = np.cumsum(ys)[:-1]
    q_l = np.cumsum(ys * ys)[:-1]
    s_t, q_t = ys.sum(), (ys * ys).sum()
    return (q_l - s_l**2 / nl) + ((q_t - q_l) - (s_t - s_l) ** 2 / (n - nl))


CRITERIA = {"gini": _gini_scan, "mse": _sse_scan}


def _impurity(y, criterion):
    if criterion == "gini":
        p = y.mean()
        return 1.0 - p * p - (1.0 - p) ** 2
    return float(np.var(y))


class DecisionTree:
    """Binary tree with ``x[feature] <= threshold`` going left.

    Nodes live in parallel arrays in preorder: ``feature`` (``-1`` for a
    leaf), ``threshold``, ``left``, ``right`` and ``value`` (one row per
    node). For ``gini`` trees ``value`` holds class frequencies ``[p0, p1]``;
    for ``mse`` trees it holds whatever ``leaf_value`` returns (default:
    the mean target).
    """

    def __init__(self, criterion="gini", max_depth=None, max_features=None,
                 min_samples_split=2, rng=None):
        if criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {criterion!r}")
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def fit(self, X, y, leaf_value=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(X) == 0:
            raise ValueError("cannot grow a tree on zero rows")
        self.n_features = X.shape[1]
        if leaf_value is None:
            if self.criterion == "gini":
                leaf_value = lambda idx: np.array([1.0 - y[idx].mean(), y[idx].mean()])
            else:
                leaf_value = lambda idx: np.array([y[idx].mean()])
        self._feature, self._threshold, self._left, self._right, self._value = [], [], [], [], []
        self.depth = 0
        self._grow(X, y, np.arange(len(X)), 0, leaf_value)
        self.feature = np.array(self._feature, dtype=np.int64)
        self.threshold = np.array(self._threshold, dtype=float)
        self.left = np.array(self._left, dtype=np.int64)
        self.right = np.array(self._right, dtype=np.int64)
        self.value = np.array(self._value, dtype=float)
        del self._feature, self._threshold, self._left, self._right, self._value
        return self

    def _new_node(self, value):
        self._feature.append(LEAF)
        self._threshold.append(0.0)
        self._left.append(LEAF)
        self._right.append(LEAF)
        self._value.append(value)
        return len(self._feature) - 1

    def _grow(self, X, y, idx, depth, leaf_value):
        node = self._new_node(leaf_value(idx))
        self.depth = max(self.depth, depth)
        if (
            len(idx) < self.min_samples_split
            or (self.max_depth is not None and depth >= self.max_depth)
            or _impurity(y[idx], self.criterion) <= 1e-15
        ):
            return node
        split = self._best_split(X, y, idx)
        if split is None:
            return node
        f, thr = split
        go_left = X[idx, f] <= thr
        self._feature[node] = f
        self._threshold[node] = thr
        self._left[node] = self._grow(X, y, idx[go_left], depth + 1, leaf_value)
        self._right[node] = self._grow(X, y, idx[~go_left], depth + 1, leaf_value)
        return node

    def _best_split(self, X, y, idx):
        """Best (feature, threshold) over up to ``max_features`` non-constant features.

        Features are visited in random order; constant ones do not use up
        the budget.
        """
        budget = self.n_features if self.max_features is None else self.max_features
        scan = CRITERIA[self.criterion]
        yn = y[idx]
        best, best_score, tried = None, np.inf, 0
        for f in self.rng.permutation(self.n_features):
            if tried >= budget:
                break
            xs = X[idx, f]
            order = np.argsort(xs, kind="stable")
            xs = xs[order]
            if xs[0] == xs[-1]:
                continue
            tried += 1
            score = scan(yn[order])
            score[xs[:-1] == xs[1:]] = np.inf
            i = int(np.argmin(score))
            if score[i] < best_score:
                thr = 0.5 * (xs[i] + xs[i + 1])
                if thr >= xs[i + 1]:  # midpoint rounded up onto the right value
                    thr = xs[i]
                best, best_score = (int(f), float(thr)), score[i]
        return best

    @property
    def n_nodes(self):
        return len(self.feature)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] != LEAF
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def predict_value(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_arrays(self, prefix=""):
        return {
            f"{prefix}feature": self.feature,
            f"{prefix}threshold": self.threshold,
            f"{prefix}left": self.left,
            f"{prefix}right": self.right,
            f"{prefix}value": self.value,
        }

    @classmethod
    def from_arrays(cls, arrays, prefix="", criterion="gini"):
        tree = cls(criterion)
        tree.feature = np.asarray(arrays[f"{prefix}feature"], dtype=np.int64)
        tree.threshold = np.asarray(arrays[f"{prefix}threshold"], dtype=float)
        tree.left = np.asarray(arrays[f"{prefix}left"], dtype=np.int64)
        tree.right = np.asarray(arrays[f"{prefix}right"], dtype=np.int64)
        tree.value = np.asarray(arrays[f"{prefix}value"], dtype=float)
        return tree
