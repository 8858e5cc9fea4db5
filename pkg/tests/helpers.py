"""Random generators and oracles shared by the test modules."""
from fractions import Fraction

import numpy as np

from fedthal.learners.bayes import fit_nb
from fedthal.learners.svm import SvmHyper, fit_svm
from fedthal.learners.tree import DtHyper, fit_dt
from fedthal.schema import Dataset


def random_binned(rng, n):
    X = rng.integers(0, 6, (n, 11))
    X[:, 9:] = rng.integers(0, 2, (n, 2))
    y = rng.integers(0, 2, n)
    y[:2] = [0, 1]
    return X, y


def random_dataset(rng, n):
    X, y = random_binned(rng, n)
    return Dataset.from_arrays(X, y)


def random_model(kind, rng):
    X, y = random_binned(rng, int(rng.integers(8, 40)))
    if kind == "dt":
        return fit_dt(X, y, DtHyper(max_depth=int(rng.integers(0, 6)), min_leaf=int(rng.integers(1, 4))))
    if kind == "nb":
        return fit_nb(X, y, alpha=float(rng.choice([0.0, 0.5, 1.0, 2.0])))
    return fit_svm(X, y, SvmHyper(C=float(rng.uniform(0.1, 10)), epochs=int(rng.integers(1, 15)),
                                  seed=int(rng.integers(0, 1000)),
                                  encoding=str(rng.choice(["ordinal", "onehot"]))))


def nb_oracle(X, y, x, alpha, card):
    """Exact naive Bayes posterior built from explicit count tables."""
    n = len(y)
    joint = []
    for c in (0, 1):
        rows = [r for r, lab in zip(X, y) if lab == c]
        p = Fraction(len(rows), n)
        for f, k in enumerate(card):
            count = sum(1 for r in rows if r[f] == x[f])
            p *= (count + alpha) / (len(rows) + alpha * k) if len(rows) + alpha * k else Fraction(1, k)
        joint.append(p)
    total = joint[0] + joint[1]
    post = [j / total for j in joint]
    return (1 if joint[1] > joint[0] else 0), post
