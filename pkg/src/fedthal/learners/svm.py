"""Soft-margin linear SVM trained by dual coordinate ascent.

The primal objective is

    0.5 * ||[w, b]||^2 + (C / n) * sum_i max(0, 1 - y_i (w . x_i + b))

i.e. the hinge loss is averaged over samples, so repeating every row k times
leaves the optimum unchanged. The bias is learned as the weight of a constant
input column. The dual box is 0 <= alpha_i <= C / n.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..errors import SingleClassDataset
from ..schema import N_BINS

SV_THRESHOLD = 1e-8
ENCODINGS = ("ordinal", "onehot")


@dataclass(frozen=True)
class SvmHyper:
    C: float = 1.0
    epochs: int = 50
    seed: int = 0
    kernel: str = "linear"
    gamma: float = 1.0
    encoding: str = "ordinal"
    # stop once every projected gradient is within tol (0 = run all epochs)
    tol: float = 1e-4

    def __post_init__(self):
        if self.kernel != "linear":
            raise ValueError(f"only the linear kernel is supported, got {self.kernel!r}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}")


def encode(X, encoding: str = "ordinal") -> np.ndarray:
    """Map 11-column binned vectors into the SVM input space."""
    X = np.atleast_2d(np.asarray(X))
    if encoding == "ordinal":
        return X.astype(np.float64)
    cbc = X[:, :-2].astype(np.int64)
    onehot = np.zeros((X.shape[0], cbc.shape[1] * N_BINS))
    rows = np.arange(X.shape[0])
    for f in range(cbc.shape[1]):
        onehot[rows, f * N_BINS + cbc[:, f]] = 1.0
    return np.hstack([onehot, X[:, -2:].astype(np.float64)])


@dataclass
class LinearSvmModel:
    w: np.ndarray
    b: float
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    hyper: SvmHyper = field(default_factory=SvmHyper)
    # row positions of the support vectors in the training data
    support_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def decision_function(self, X) -> np.ndarray:
        return encode(X, self.hyper.encoding) @ self.w + self.b

    def dual_decision_function(self, X) -> np.ndarray:
        Z = encode(X, self.hyper.encoding)
        if len(self.dual_coefs) == 0:
            return np.full(Z.shape[0], float(self.b))
        return (Z @ self.support_vectors.T) @ self.dual_coefs + self.b

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(np.int64)

    def predict_one(self, x) -> int:
        return int(self.predict(x)[0])


def _max_violation(alpha, grad, upper) -> float:
    pg = np.where(alpha <= 0.0, np.minimum(grad, 0.0),
                  np.where(alpha >= upper, np.maximum(grad, 0.0), grad))
    return float(np.abs(pg).max())


def fit_svm(X, y, hyper: SvmHyper = SvmHyper(), init_alpha: Optional[np.ndarray] = None,
            return_alpha: bool = False):
    """Train on binned vectors ``X`` and 0/1 labels ``y``.

    ``init_alpha`` warm-starts the dual variables (clipped into the box).
    Training stops early when the largest projected-gradient magnitude is
    at most ``hyper.tol``; a converged warm start makes no updates at all.
    """
    Z = encode(X, hyper.encoding)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise SingleClassDataset("linear SVM needs both classes in the training data")
    n, d = Z.shape
    ys = np.where(y == 1, 1.0, -1.0)
    Za = np.hstack([Z, np.ones((n, 1))])
    Zy = Za * ys[:, None]
    q = np.einsum("ij,ij->i", Za, Za)
    upper = hyper.C / n

    alpha = np.zeros(n) if init_alpha is None else np.clip(np.asarray(init_alpha, float), 0.0, upper)
    wa = alpha @ Zy
    rng = np.random.default_rng(hyper.seed)
    rows = list(Zy)
    for _ in range(hyper.epochs):
        if hyper.tol > 0 and _max_violation(alpha, Zy @ wa - 1.0, upper) <= hyper.tol:
            break
        for i in rng.permutation(n).tolist():
            zi = rows[i]
            a = alpha[i]
            new = a - (float(wa @ zi) - 1.0) / q[i]
            if new < 0.0:
                new = 0.0
            elif new > upper:
                new = upper
            if new != a:
                wa += (new - a) * zi
                alpha[i] = new

    alpha[alpha <= SV_THRESHOLD] = 0.0
    wa = alpha @ Zy
    w = wa[:-1].copy()
    sv = np.flatnonzero(alpha > 0)
    free = sv[alpha[sv] < upper]
    if len(free):
        b = float(np.mean(ys[free] - Z[free] @ w))
    else:
        b = float(wa[-1])
    model = LinearSvmModel(w=w, b=b, support_vectors=Z[sv].copy(),
                           dual_coefs=alpha[sv] * ys[sv], hyper=hyper,
                           support_indices=sv.astype(np.int64))
    return (model, alpha) if return_alpha else model


def train_svm(data, hyper: SvmHyper = SvmHyper(), init_alpha=None):
    return fit_svm(data.X, data.y, hyper, init_alpha=init_alpha)


def predict_svm(m: LinearSvmModel, x) -> int:
    """sign(w . x + b) with zero mapped to the carrier class."""
    return m.predict_one(x)


def alpha_from_model(m: LinearSvmModel, n: int) -> np.ndarray:
    """Dense dual vector of length ``n`` recovered from the stored support set."""
    alpha = np.zeros(n)
    alpha[m.support_indices] = np.abs(m.dual_coefs)
    return alpha


def with_hyper(m: LinearSvmModel, **changes) -> LinearSvmModel:
    return replace(m, hyper=replace(m.hyper, **changes))
