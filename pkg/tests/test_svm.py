import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fedthal.errors import SingleClassDataset
from fedthal.learners.svm import SvmHyper, alpha_from_model, encode, fit_svm

CONVERGED = SvmHyper(C=10.0, epochs=3000, tol=1e-10, seed=1)


def test_two_point_problem():
    m = fit_svm(np.array([[-1.0], [1.0]]), np.array([0, 1]), SvmHyper(C=10.0, epochs=200))
    assert m.w == pytest.approx([1.0], abs=1e-3)
    assert m.b == pytest.approx(0.0, abs=1e-3)
    assert sorted(m.dual_coefs.tolist()) == pytest.approx([-0.5, 0.5], abs=1e-3)


def separable_set(rng, n=30, d=2, gap=1.0):
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    X = rng.normal(size=(n, d)) * 2
    s = X @ direction
    y = (s > 0).astype(int)
    X += np.outer(np.where(y == 1, gap, -gap), direction)
    if y.min() == y.max():
        y[0] = 1 - y[0]
        X[0] -= 2 * (X[0] @ direction) * direction
    return X, y


def kkt_violation(X, y, m, alpha, C):
    n = len(y)
    U = C / n
    ys = np.where(y == 1, 1.0, -1.0)
    margin = ys * (X @ m.w + m.b)
    worst = 0.0
    for a, mg in zip(alpha, margin):
        if a <= 0:
            worst = max(worst, 1 - mg)
        elif a >= U:
            worst = max(worst, mg - 1)
        else:
            worst = max(worst, abs(mg - 1))
    return worst


def test_kkt_on_separable_toy_sets():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        X, y = separable_set(rng)
        m, alpha = fit_svm(X, y, CONVERGED, return_alpha=True)
        assert kkt_violation(X, y, m, alpha, CONVERGED.C) < 1e-3
        assert np.all(alpha >= 0) and np.all(alpha <= CONVERGED.C / len(y) + 1e-15)


def test_duplication_invariance():
    rng = np.random.default_rng(5)
    X = rng.integers(0, 6, (60, 11))
    y = rng.integers(0, 2, 60)
    hyper = SvmHyper(epochs=1000, tol=0.0)
    a = fit_svm(X, y, hyper)
    b = fit_svm(np.tile(X, (3, 1)), np.tile(y, 3), hyper)
    assert np.abs(a.w - b.w).max() < 1e-6
    assert abs(a.b - b.b) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["ordinal", "onehot"]))
def test_primal_and_dual_forms_agree(seed, encoding):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 80))
    X = rng.integers(0, 6, (n, 11))
    X[:, 9:] = rng.integers(0, 2, (n, 2))
    y = rng.integers(0, 2, n)
    y[:2] = [0, 1]
    m = fit_svm(X, y, SvmHyper(epochs=20, seed=seed, encoding=encoding))
    np.testing.assert_allclose(m.decision_function(X), m.dual_decision_function(X), atol=1e-9)
    assert np.array_equal(m.support_vectors, encode(X, encoding)[m.support_indices])
    ys = np.where(y == 1, 1.0, -1.0)
    assert np.array_equal(np.sign(m.dual_coefs), ys[m.support_indices])


def separable_by_grid(X, y, steps=720):
    """Brute-force oracle: some direction on a fine angle grid splits the classes."""
    for t in np.linspace(0, np.pi, steps, endpoint=False):
        s = X @ np.array([np.cos(t), np.sin(t)])
        if s[y == 1].min() > s[y == 0].max() or s[y == 0].min() > s[y == 1].max():
            return True
    return False


def test_separable_blobs_fit_perfectly():
    rng = np.random.default_rng(8)
    X = np.vstack([rng.normal([-3, -3], 0.7, (40, 2)), rng.normal([3, 3], 0.7, (40, 2))])
    y = np.repeat([0, 1], 40)
    assert separable_by_grid(X, y)
    m = fit_svm(X, y, SvmHyper(C=100.0, epochs=500))
    assert np.array_equal(m.predict(X), y)


def test_converged_warm_start_makes_no_updates():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 6, (80, 11))
    y = rng.integers(0, 2, 80)
    hyper = SvmHyper(epochs=2000, tol=1e-6)
    m, alpha = fit_svm(X, y, hyper, return_alpha=True)
    again, alpha2 = fit_svm(X, y, hyper, init_alpha=alpha, return_alpha=True)
    assert np.array_equal(alpha, alpha2)
    assert np.array_equal(m.w, again.w) and m.b == again.b
    assert np.array_equal(alpha_from_model(m, 80), alpha)


def test_single_class_rejected():
    with pytest.raises(SingleClassDataset):
        fit_svm(np.zeros((4, 11)), np.ones(4, dtype=int))


def test_hyper_validation():
    for bad in (dict(C=0), dict(kernel="rbf"), dict(encoding="x"), dict(epochs=-1), dict(tol=-1)):
        with pytest.raises(ValueError):
            SvmHyper(**bad)


def test_predict_sign_rule():
    from fedthal.learners.svm import LinearSvmModel, predict_svm
    w = np.zeros(11)
    w[0] = 1.0
    m = LinearSvmModel(w=w, b=0.0, support_vectors=np.zeros((0, 11)), dual_coefs=np.zeros(0))
    x = np.zeros(11, dtype=int)
    x[0] = 5
    assert predict_svm(m, x) == 1
    assert predict_svm(m, np.zeros(11, dtype=int)) == 1  # zero maps to carrier
    neg = LinearSvmModel(w=np.zeros(11), b=-0.5, support_vectors=np.zeros((0, 11)), dual_coefs=np.zeros(0))
    assert np.all(neg.predict(np.random.default_rng(0).integers(0, 6, (20, 11))) == 0)
