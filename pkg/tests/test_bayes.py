import itertools
import time
from fractions import Fraction

import numpy as np
import pytest
from helpers import nb_oracle

from fedthal.errors import EmptyDataset, NegativeAlpha
from fedthal.learners.bayes import fit_nb, predict_nb


def test_hand_example():
    # rows (x, y): (1,1), (1,1), (0,0), (1,0); one binary feature, alpha = 1
    X = np.array([[1], [1], [0], [1]])
    y = np.array([1, 1, 0, 0])
    m = fit_nb(X, y, alpha=1.0, cardinality=(2,))
    assert np.exp(m.cond_log_prob[1][0][1]) == pytest.approx(0.75)
    assert np.exp(m.cond_log_prob[0][0][1]) == pytest.approx(0.5)
    assert m.class_log_priors[0] == m.class_log_priors[1]
    cls, post = predict_nb(m, [1])
    # 0.5*0.5 vs 0.5*0.75, normalized
    assert cls == 1
    assert post == pytest.approx([0.4, 0.6], abs=1e-12)


def test_unseen_bin_gets_mass():
    X = np.zeros((4, 11), dtype=int)
    m = fit_nb(X, [0, 0, 1, 1], alpha=1.0)
    assert np.exp(m.cond_log_prob[0][0][5]) == pytest.approx(1 / (2 + 6))


def test_uniform_model_posterior_is_prior():
    X = np.array([[0], [1], [0], [1], [0], [1]])
    y = np.array([0, 0, 0, 0, 1, 1])
    m = fit_nb(X, y, 1.0, (2,))
    for x in ([0], [1]):
        _, post = predict_nb(m, x)
        assert post == pytest.approx([4 / 6, 2 / 6])
        assert post.sum() == pytest.approx(1.0, abs=1e-9)


def test_posterior_tie_goes_to_class_0():
    X = np.array([[0], [1], [0], [1]])
    m = fit_nb(X, np.array([0, 0, 1, 1]), 1.0, (2,))
    cls, post = predict_nb(m, [0])
    assert post[0] == pytest.approx(post[1]) and cls == 0


def test_matches_fraction_oracle():
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    for _ in range(200):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(2, 33))
        X = rng.integers(0, 2, (n, d))
        y = rng.integers(0, 2, n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        alpha = float(rng.choice([0.5, 1.0, 2.0]))
        m = fit_nb(X, y, alpha, (2,) * d)
        for x in itertools.product((0, 1), repeat=d):
            cls, post = predict_nb(m, x)
            o_cls, o_post = nb_oracle(X.tolist(), y.tolist(), x, Fraction(alpha), (2,) * d)
            assert cls == o_cls
            assert np.allclose(post, [float(p) for p in o_post], atol=1e-12, rtol=0)
    assert time.perf_counter() - start < 10


def test_errors():
    with pytest.raises(NegativeAlpha):
        fit_nb(np.zeros((2, 1), int), [0, 1], alpha=-1, cardinality=(2,))
    with pytest.raises(EmptyDataset):
        fit_nb(np.zeros((0, 1), int), [], cardinality=(2,))


def test_default_cardinality_on_cbc_vectors(small_binned):
    m = fit_nb(small_binned.X, small_binned.y)
    assert m.bin_cardinality == (6,) * 9 + (2, 2)
    for c in (0, 1):
        for f, k in enumerate(m.bin_cardinality):
            assert np.exp(m.cond_log_prob[c][f]).sum() == pytest.approx(1.0)
    assert np.mean(m.predict(small_binned.X) == small_binned.y) > 0.85
