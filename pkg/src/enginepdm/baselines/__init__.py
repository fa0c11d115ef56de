"""Classic per-row classifiers: random forest, k-NN, Gaussian naive Bayes, gradient boosting."""

from .bayes import GaussianNB, MissingClass, fit_gnb, gnb_predict
from .boosting import GbmClassifier, GbmConfig, fit_gbm
from .forest import EmptyDataset, ForestClassifier, ForestConfig, fit_forest
from .knn import KnnClassifier, KnnConfig, knn_predict
from .tree import DecisionTree

CLASSIC_FAMILIES = ("rf", "knn", "nb", "gbm")

__all__ = [
    "GaussianNB", "MissingClass", "fit_gnb", "gnb_predict",
    "GbmClassifier", "GbmConfig", "fit_gbm",
    "EmptyDataset", "ForestClassifier", "ForestConfig", "fit_forest",
    "KnnClassifier", "KnnConfig", "knn_predict", "DecisionTree", "CLASSIC_FAMILIES",
]
