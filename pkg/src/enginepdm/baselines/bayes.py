from __future__ import annotations

import numpy as np

VAR_FLOOR = 1e-9


class MissingClass(ValueError):
    pass


class GaussianNB:
    """Binary Gaussian naive Bayes evaluated in log space.

    ``theta``/``var`` are ``(2, d)`` per-class feature means and variances,
    ``prior`` the class frequencies.
    """

    family = "nb"
    threshold = 0.5

    def __init__(self, prior, theta, var):
        self.prior = np.asarray(prior, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.var = np.asarray(var, dtype=float)
        self.n_features = self.theta.shape[1]

    def joint_log_likelihood(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((len(X), 2))
        for c in range(2):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            ll = ll - 0.5 * np.sum((X - self.theta[c]) ** 2 / self.var[c], axis=1)
            out[:, c] = np.log(self.prior[c]) + ll
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        # p1 = 1 / (1 + exp(jll0 - jll1)), written to avoid overflow
        diff = jll[:, 1] - jll[:, 0]
        e = np.exp(-np.abs(diff))
        return np.where(diff >= 0, 1.0 / (1.0 + e), e / (1.0 + e))

    def predict(self, X):
        return (self.predict_proba(X) >= self.threshold).astype(np.int64)


def fit_gnb(X, y) -> GaussianNB:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    theta, var, prior = [], [], []
    for c in (0, 1):
        Xc = X[y == c]
        if len(Xc) == 0:
            raise MissingClass(f"no training rows of class {c}")
        theta.append(Xc.mean(axis=0))
        var.append(np.maximum(Xc.var(axis=0), VAR_FLOOR))
        prior.append(len(Xc) / len(X))
    return GaussianNB(prior, theta, var)


def gnb_predict(model: GaussianNB, X) -> np.ndarray:
    return model.predict_proba(X)
