import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from enginepdm.baselines import (
    DecisionTree, EmptyDataset, ForestConfig, GbmConfig, KnnClassifier, KnnConfig, MissingClass,
    fit_forest, fit_gbm, fit_gnb, gnb_predict, knn_predict,
)


def blobs(n=200, d=4, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n)
    X = rng.normal(size=(n, d)) + y[:, None] * 1.5
    return X, y


# -- trees and forest ---------------------------------------------------------

def test_pure_class_forest():
    X = np.random.default_rng(0).normal(size=(20, 3))
    model = fit_forest(X, np.ones(20, dtype=int), ForestConfig(n_trees=5))
    assert np.all(model.predict_proba(X) == 1.0)
    assert np.all(model.predict(X) == 1)


def best_threshold_oracle(x, y):
    """Exhaustive scan of midpoints for the lowest weighted Gini."""
    best = None
    xs = sorted(set(x.tolist()))
    for a, b in zip(xs, xs[1:]):
        thr = (a + b) / 2
        score = 0.0
        for side in (y[x <= thr], y[x > thr]):
            p = side.mean()
            score += len(side) * (1 - p * p - (1 - p) ** 2)
        if best is None or score < best[0] - 1e-12:
            best = (score, thr)
    return best[1]


def test_single_stump_reproduces_split():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 10, 60)
    y = (x > 6.3).astype(int)
    model = fit_forest(x[:, None], y, ForestConfig(n_trees=1, max_depth=1, bootstrap=False))
    tree = model.trees[0]
    assert tree.feature[0] == 0
    assert tree.threshold[0] == best_threshold_oracle(x, y)
    assert np.array_equal(model.predict(x[:, None]), y)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_stump_matches_oracle_on_noisy_data(seed):
    rng = np.random.default_rng(seed)
    x = np.round(rng.uniform(0, 5, 30), 1)
    y = (x + rng.normal(0, 1, 30) > 2.5).astype(int)
    if y.min() == y.max() or len(set(x)) < 2:
        return
    tree = DecisionTree("gini", max_depth=1).fit(x[:, None], y)
    if tree.feature[0] == -1:
        return
    assert tree.threshold[0] == best_threshold_oracle(x, y)


def test_forest_deterministic():
    X, y = blobs()
    a = fit_forest(X, y, ForestConfig(n_trees=10, seed=4))
    b = fit_forest(X, y, ForestConfig(n_trees=10, seed=4))
    for ta, tb in zip(a.trees, b.trees):
        for k, v in ta.to_arrays().items():
            assert np.array_equal(v, tb.to_arrays()[k])
    assert np.array_equal(a.predict_proba(X), b.predict_proba(X))


def test_forest_learns_blobs():
    X, y = blobs(400)
    model = fit_forest(X[:300], y[:300], ForestConfig(n_trees=30))
    assert np.mean(model.predict(X[300:]) == y[300:]) > 0.8


def test_tree_array_round_trip():
    X, y = blobs()
    t = DecisionTree("gini", max_depth=4, rng=np.random.default_rng(1)).fit(X, y)
    back = DecisionTree.from_arrays(t.to_arrays("t."), "t.")
    assert np.array_equal(back.predict_value(X), t.predict_value(X))
    assert t.depth <= 4


def test_empty_training_set():
    with pytest.raises(EmptyDataset):
        fit_forest(np.empty((0, 2)), np.empty(0))


# -- k nearest neighbours ------------------------------------------------------

def test_knn_memorizes():
    X = np.arange(10.0).reshape(5, 2)
    y = np.array([0, 1, 0, 1, 1])
    assert np.array_equal(knn_predict(X, y, X, KnnConfig(k=1)), y)


def test_knn_vote_fraction():
    X = np.array([[0.0], [1.0], [2.0], [10.0]])
    y = np.array([1, 1, 0, 0])
    p = KnnClassifier(X, y).predict_proba([[0.9]])
    assert p[0] == pytest.approx(2 / 3)


def test_knn_distance_ties_go_to_lower_index():
    X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    y = np.array([1, 0, 0, 1])
    # all four rows are at distance 1; the first three win
    assert knn_predict(X, y, [[0.0]], KnnConfig(k=3))[0] == pytest.approx(1 / 3)


def test_knn_against_exhaustive_scan():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(200, 3))
    y = rng.integers(0, 2, 200)
    Q = np.vstack([rng.normal(size=(40, 3)), X[:10]])
    got = knn_predict(X, y, Q)
    ref = [oracles.knn_scan(X.tolist(), y.tolist(), q.tolist(), 3) for q in Q]
    assert got.tolist() == ref


def test_knn_bad_k():
    with pytest.raises(ValueError):
        KnnConfig(k=0)
    with pytest.raises(ValueError):
        KnnClassifier(np.zeros((2, 1)), np.zeros(2), KnnConfig(k=3))


# -- naive Bayes -----------------------------------------------------------------

def test_gnb_symmetric_midpoint():
    rng = np.random.default_rng(2)
    X0 = rng.normal(size=(50, 3)) + 2.0
    X = np.vstack([X0, -X0])
    y = np.r_[np.zeros(50, int), np.ones(50, int)]
    model = fit_gnb(X, y)
    assert abs(gnb_predict(model, np.zeros((1, 3)))[0] - 0.5) <= 1e-9


def test_gnb_separated_clusters():
    x = np.r_[np.linspace(-1.2, -0.8, 20), np.linspace(0.8, 1.2, 20)][:, None]
    y = np.r_[np.zeros(20, int), np.ones(20, int)]
    model = fit_gnb(x, y)
    assert model.prior.tolist() == [0.5, 0.5]
    p = gnb_predict(model, [[1.0], [-1.0]])
    assert p[0] > 0.99 and p[1] < 0.01


def test_gnb_priors_are_frequencies():
    X, y = blobs(90)
    model = fit_gnb(X, y)
    assert model.prior[1] == np.mean(y)


def test_gnb_extreme_inputs_finite():
    X, y = blobs()
    model = fit_gnb(X * 1e-6, y)  # tiny variances
    p = model.predict_proba(np.array([[1e3] * 4, [-1e3] * 4]))
    assert np.all(np.isfinite(p)) and np.all((p >= 0) & (p <= 1))


def test_gnb_missing_class():
    with pytest.raises(MissingClass):
        fit_gnb(np.zeros((3, 1)), np.zeros(3))


# -- gradient boosting ---------------------------------------------------------

def test_gbm_zero_learning_rate_is_base_rate():
    X, y = blobs(150)
    model = fit_gbm(X, y, GbmConfig(learning_rate=0.0))
    p = model.predict_proba(X)
    assert np.all(p == np.mean(y))


def test_gbm_single_round_separable():
    x = np.r_[np.linspace(0, 1, 15), np.linspace(2, 3, 25)][:, None]
    y = np.r_[np.zeros(15, int), np.ones(25, int)]
    model = fit_gbm(x, y, GbmConfig(n_estimators=1, max_depth=1, learning_rate=1.0,
                                     max_features=None))
    assert np.mean(model.predict(x) == y) == 1.0


def test_gbm_base_rate_half():
    y = np.r_[np.zeros(10, int), np.ones(10, int)]
    model = fit_gbm(np.arange(20.0)[:, None], y, GbmConfig(n_estimators=0))
    assert model.init_score == 0.0


def test_gbm_learns():
    X, y = blobs(400)
    model = fit_gbm(X[:300], y[:300])
    assert np.mean(model.predict(X[300:]) == y[300:]) > 0.8


@pytest.mark.parametrize("make", [
    lambda X, y: fit_forest(X, y, ForestConfig(n_trees=5)),
    lambda X, y: KnnClassifier(X, y),
    fit_gnb,
    fit_gbm,
])
def test_probabilities_in_unit_interval(make):
    X, y = blobs(120)
    model = make(X, y)
    p = model.predict_proba(X)
    assert np.all((p >= 0) & (p <= 1))
    assert np.array_equal(model.predict(X), (p >= 0.5).astype(int))
