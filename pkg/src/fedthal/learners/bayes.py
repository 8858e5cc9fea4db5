"""Categorical naive Bayes with additive (Laplace) smoothing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptyDataset, NegativeAlpha
from ..schema import N_BINS, N_FEATURES

# log-likelihood gaps this small are rounding noise on an exact tie
TIE_TOL = 1e-9


def default_cardinality(n_features: int = N_FEATURES) -> tuple[int, ...]:
    if n_features != N_FEATURES:
        raise ValueError("pass cardinality explicitly for non-CBC feature layouts")
    return (N_BINS,) * (N_FEATURES - 2) + (2, 2)


@dataclass
class NaiveBayesModel:
    class_log_priors: np.ndarray
    # cond_log_prob[c][f] has one entry per category of feature f
    cond_log_prob: list[list[np.ndarray]]
    laplace_alpha: float
    bin_cardinality: tuple[int, ...]

    def joint_log_likelihood(self, x) -> np.ndarray:
        jll = self.class_log_priors.astype(np.float64).copy()
        for c in range(2):
            for f, v in enumerate(x):
                jll[c] += self.cond_log_prob[c][f][int(v)]
        return jll

    def predict_proba_one(self, x) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        top = jll.max()
        if not np.isfinite(top):
            # no class can produce x (only possible with alpha = 0)
            return np.full(len(jll), 1.0 / len(jll))
        p = np.exp(jll - top)
        return p / p.sum()

    def predict_one(self, x) -> int:
        jll = self.joint_log_likelihood(x)
        if jll[1] == jll[0]:
            return 0
        return 1 if jll[1] - jll[0] > TIE_TOL else 0

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X))
        return np.array([self.predict_one(row) for row in X], dtype=np.int64)


def fit_nb(X, y, alpha: float = 1.0, cardinality: Optional[Sequence[int]] = None) -> NaiveBayesModel:
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if alpha < 0:
        raise NegativeAlpha(f"alpha must be >= 0, got {alpha}")
    n = len(y)
    if n == 0:
        raise EmptyDataset("cannot fit naive Bayes on zero rows")
    if cardinality is None:
        cardinality = default_cardinality(X.shape[1])
    cardinality = tuple(int(k) for k in cardinality)
    if X.size and np.any(X.max(axis=0) >= np.array(cardinality)):
        raise ValueError("feature value exceeds declared cardinality")

    class_counts = np.bincount(y, minlength=2)
    with np.errstate(divide="ignore"):
        priors = np.log(class_counts / n)
    cond = []
    for c in range(2):
        Xc = X[y == c]
        per_feature = []
        for f, k in enumerate(cardinality):
            counts = np.bincount(Xc[:, f], minlength=k).astype(np.float64)
            denom = class_counts[c] + alpha * k
            with np.errstate(divide="ignore", invalid="ignore"):
                if denom > 0:
                    probs = (counts + alpha) / denom
                else:
                    probs = np.full(k, 1.0 / k)
                per_feature.append(np.log(probs))
        cond.append(per_feature)
    return NaiveBayesModel(priors, cond, float(alpha), cardinality)


def train_nb(data, alpha: float = 1.0) -> NaiveBayesModel:
    if len(data) == 0:
        raise EmptyDataset("dataset is empty")
    return fit_nb(data.X, data.y, alpha)


def predict_nb(m: NaiveBayesModel, x):
    """(class, posterior) with ties resolved to class 0."""
    return m.predict_one(x), m.predict_proba_one(x)
