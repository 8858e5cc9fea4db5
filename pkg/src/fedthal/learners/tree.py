"""Multiway categorical decision tree grown on information gain."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import EmptyDataset, NotADistribution


def entropy(class_probs) -> float:
    """Shannon entropy in bits, with 0 * log 0 taken as 0."""
    p = np.asarray(class_probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise NotADistribution(f"not a probability vector: {class_probs!r}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise NotADistribution(f"probabilities sum to {p.sum()!r}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0


def _entropy_counts(counts) -> float:
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            q = c / total
            h -= q * math.log2(q)
    return h


@dataclass(frozen=True)
class DtHyper:
    criterion: str = "entropy"
    max_depth: int = 8
    min_leaf: int = 5

    def __post_init__(self):
        if self.criterion != "entropy":
            raise ValueError(f"unsupported criterion {self.criterion!r}")
        if self.max_depth < 0 or self.min_leaf < 1:
            raise ValueError("max_depth must be >= 0 and min_leaf >= 1")


@dataclass
class Node:
    counts: tuple[int, int]
    feature: Optional[int] = None
    gain: float = 0.0
    children: dict[int, "Node"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def prediction(self) -> int:
        # majority class; ties go to the non-carrier class
        return 1 if self.counts[1] > self.counts[0] else 0

    @property
    def n_samples(self) -> int:
        return self.counts[0] + self.counts[1]

    def depth(self) -> int:
        if self.is_leaf or not self.children:
            return 0
        return 1 + max(c.depth() for c in self.children.values())


@dataclass
class DecisionTreeModel:
    root: Node
    hyper: DtHyper
    feature_importances: np.ndarray
    n_features: int

    def predict_one(self, x) -> int:
        node = self.root
        while not node.is_leaf:
            child = node.children.get(int(x[node.feature]))
            if child is None:
                return node.prediction
            node = child
        return node.prediction

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X))
        return np.array([self.predict_one(row) for row in X], dtype=np.int64)

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children[k] for k in sorted(node.children, reverse=True))


def split_gains(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Information gain of a multiway split on each column of ``X``."""
    n = len(y)
    parent = _entropy_counts(np.bincount(y, minlength=2).tolist())
    gains = np.zeros(X.shape[1])
    for f in range(X.shape[1]):
        col = X[:, f]
        table = np.bincount(col * 2 + y, minlength=2 * (int(col.max()) + 1)).reshape(-1, 2)
        rem = 0.0
        for c0, c1 in table.tolist():
            size = c0 + c1
            if size:
                rem += size / n * _entropy_counts((c0, c1))
        gains[f] = parent - rem
    return gains


def _grow(X, y, depth, hyper, n_total, importances) -> Node:
    counts = tuple(np.bincount(y, minlength=2).tolist())
    node = Node(counts=counts)
    if depth >= hyper.max_depth or min(counts) == 0:
        return node
    gains = split_gains(X, y)
    best = int(np.argmax(gains))  # argmax keeps the lowest index on ties
    if gains[best] <= 1e-12:
        return node
    col = X[:, best]
    children = {}
    for v in np.unique(col).tolist():
        mask = col == v
        if mask.sum() < hyper.min_leaf:
            continue
        children[int(v)] = _grow(X[mask], y[mask], depth + 1, hyper, n_total, importances)
    if not children:
        return node
    node.feature = best
    node.gain = float(gains[best])
    node.children = children
    importances[best] += len(y) / n_total * gains[best]
    return node


def fit_dt(X, y, hyper: DtHyper = DtHyper()) -> DecisionTreeModel:
    X = np.asarray(X, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyDataset("cannot grow a tree on zero rows")
    if np.any(X < 0):
        raise ValueError("categorical features must be non-negative integers")
    importances = np.zeros(X.shape[1])
    root = _grow(X, y, 0, hyper, len(y), importances)
    total = importances.sum()
    if total > 0:
        importances = importances / total
    return DecisionTreeModel(root, hyper, importances, X.shape[1])


def train_dt(data, hyper: DtHyper = DtHyper()) -> DecisionTreeModel:
    if len(data) == 0:
        raise EmptyDataset("dataset is empty")
    return fit_dt(data.X, data.y, hyper)


def predict_dt(m: DecisionTreeModel, x) -> int:
    return m.predict_one(x)
