"""Local training and the two global aggregation schemes.

``aggregate_paper13`` follows the thirteen-step global-model recipe:

1. obtain local models from the clients
2. initialise a linear-kernel SVM as the global model
3. concatenate the SVM locals' support vectors and dual coefficients
4. average the dual coefficients (each scaled by 1/k for k SVM locals, so
   the warm-start decision function is the mean of the local ones)
5-6. average the decision-tree feature importances onto the global model
7. copy kernel and gamma from the first SVM local
8. concatenate the client shards into a global dataset
9. retrain the global SVM on that dataset, warm-started from step 4
10-13. evaluation is :func:`evaluate_global`

Naive Bayes locals contribute only their shard to step 8.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptyShards, FedThalError, HeterogeneousModels, InvalidConfig
from ..learners.bayes import fit_nb
from ..learners.models import KINDS, LocalModel
from ..learners.svm import LinearSvmModel, SvmHyper, encode, fit_svm
from ..learners.tree import DtHyper, fit_dt
from ..metrics import EvalReport, confusion, report
from ..schema import Dataset
from .wire import GlobalModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnerHyper:
    dt: DtHyper = DtHyper()
    nb_alpha: float = 1.0
    svm: SvmHyper = SvmHyper()


def client_train(client_id: str, shard: Dataset, model_kind: str,
                 hyper: LearnerHyper = LearnerHyper()) -> LocalModel:
    if model_kind not in KINDS:
        raise InvalidConfig(f"unknown model kind {model_kind!r}")
    if len(shard) == 0:
        raise EmptyShards(f"client {client_id}: shard is empty")
    X, y = shard.X, shard.y
    try:
        if model_kind == "dt":
            model = fit_dt(X, y, hyper.dt)
        elif model_kind == "nb":
            model = fit_nb(X, y, hyper.nb_alpha)
        else:
            model = fit_svm(X, y, hyper.svm)
    except FedThalError as exc:
        raise type(exc)(f"client {client_id}: {exc}") from exc
    acc = float(np.mean(model.predict(X) == y))
    return LocalModel(kind=model_kind, model=model, client_id=client_id,
                      train_size=len(shard), train_accuracy=acc)


@dataclass
class AggregationReport:
    n_svm_locals: int
    n_dt_locals: int
    n_nb_locals: int
    global_dataset_size: int
    warm_start_w: Optional[np.ndarray] = None
    warm_start_b: Optional[float] = None
    kernel: str = "linear"
    gamma: Optional[float] = None
    dt_criterion: Optional[str] = None
    dt_max_depth: Optional[int] = None
    warnings: list[str] = field(default_factory=list)


def average_decision_functions(svms: Sequence[LinearSvmModel]) -> tuple[np.ndarray, float]:
    k = len(svms)
    w = sum(m.w for m in svms) / k
    b = sum(m.b for m in svms) / k
    return w, float(b)


def aggregate_paper13(locals_: Sequence[LocalModel], shards: Sequence[Dataset],
                      hyper: SvmHyper = SvmHyper()):
    """Build the global SVM from heterogeneous locals plus the pooled shards.

    ``locals_`` and ``shards`` must be aligned (same client order).
    Returns ``(GlobalModel, AggregationReport)``.
    """
    if not locals_:
        raise InvalidConfig("need at least one local model")
    if len(shards) != len(locals_):
        raise InvalidConfig("one shard per local model is required")
    sizes = [len(s) for s in shards]
    if sum(sizes) == 0:
        raise EmptyShards("all client shards are empty")

    svm_locals = [(i, lm) for i, lm in enumerate(locals_) if lm.kind == "svm"]
    dt_locals = [lm for lm in locals_ if lm.kind == "dt"]
    nb_count = sum(lm.kind == "nb" for lm in locals_)

    # step 8
    global_data = Dataset.concat(list(shards), provenance="global(" + ",".join(
        lm.client_id for lm in locals_) + ")")
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    agg = AggregationReport(len(svm_locals), len(dt_locals), nb_count, len(global_data))
    if nb_count:
        agg.warnings.append(f"{nb_count} naive Bayes local(s) contribute data only, no parameters")

    # steps 5-6
    importances = None
    if dt_locals:
        importances = np.mean(np.vstack([lm.model.feature_importances for lm in dt_locals]), axis=0)
        agg.dt_criterion = dt_locals[0].model.hyper.criterion
        agg.dt_max_depth = dt_locals[0].model.hyper.max_depth

    # steps 2-4 and 7
    global_hyper = hyper
    init_alpha = None
    warm = None
    if svm_locals:
        first = svm_locals[0][1].model.hyper
        global_hyper = replace(hyper, kernel=first.kernel, gamma=first.gamma)
        svms = [lm.model for _, lm in svm_locals]
        k = len(svms)
        w0, b0 = average_decision_functions(svms)
        agg.warm_start_w, agg.warm_start_b = w0, b0
        sv = np.vstack([m.support_vectors for m in svms])
        duals = np.concatenate([m.dual_coefs for m in svms]) / k
        idx = np.concatenate([offsets[i] + lm.model.support_indices for i, lm in svm_locals])
        warm = LinearSvmModel(w=w0, b=b0, support_vectors=sv, dual_coefs=duals,
                              hyper=global_hyper, support_indices=idx.astype(np.int64))
        if all(m.hyper.encoding == global_hyper.encoding for m in svms):
            init_alpha = np.zeros(len(global_data))
            np.add.at(init_alpha, idx, np.abs(duals))
        else:
            agg.warnings.append("encoding mismatch between locals and global; warm start skipped")
    else:
        agg.warnings.append("no SVM local: global SVM initialised with default kernel and gamma")
    agg.kernel, agg.gamma = global_hyper.kernel, global_hyper.gamma

    # step 9
    if global_hyper.epochs == 0 and warm is not None:
        svm = warm
    else:
        svm = fit_svm(global_data.X, global_data.y, global_hyper, init_alpha=init_alpha)

    g = GlobalModel(svm=svm, mean_feature_importances=importances,
                    provenance={"mode": "paper13", "round_count": 1,
                                "client_ids": [lm.client_id for lm in locals_]})
    for msg in agg.warnings:
        log.info(msg)
    return g, agg


def weighted_average(svms: Sequence[LinearSvmModel], sizes: Sequence[int]) -> tuple[np.ndarray, float]:
    """Shard-size-weighted mean of (w, b)."""
    total = float(sum(sizes))
    w = sum(m.w * (n / total) for m, n in zip(svms, sizes))
    b = sum(m.b * (n / total) for m, n in zip(svms, sizes))
    return np.asarray(w, dtype=np.float64), float(b)


def fedavg_aggregate(locals_: Sequence[LocalModel], round_count: int) -> GlobalModel:
    if not locals_:
        raise InvalidConfig("need at least one local model")
    if any(lm.kind != "svm" for lm in locals_):
        raise HeterogeneousModels("FedAvg needs every client to train a linear SVM")
    svms = [lm.model for lm in locals_]
    w, b = weighted_average(svms, [lm.train_size for lm in locals_])
    d = len(w)
    svm = LinearSvmModel(w=w, b=b, support_vectors=np.zeros((0, d)), dual_coefs=np.zeros(0),
                         hyper=svms[0].hyper)
    return GlobalModel(svm=svm, provenance={"mode": "fedavg", "round_count": round_count,
                                            "client_ids": [lm.client_id for lm in locals_]})


def zero_global(hyper: SvmHyper, n_features: int) -> GlobalModel:
    d = encode(np.zeros((1, n_features), dtype=np.int64), hyper.encoding).shape[1]
    svm = LinearSvmModel(w=np.zeros(d), b=0.0, support_vectors=np.zeros((0, d)),
                         dual_coefs=np.zeros(0), hyper=hyper)
    return GlobalModel(svm=svm, provenance={"mode": "fedavg", "round_count": 0, "client_ids": []})


def strip_support(m: LinearSvmModel) -> LinearSvmModel:
    """Weights-only copy: support vectors are training rows and stay local."""
    d = len(m.w)
    return replace(m, support_vectors=np.zeros((0, d)), dual_coefs=np.zeros(0),
                   support_indices=np.zeros(0, dtype=np.int64))


def evaluate_global(g: GlobalModel, test: Dataset, split_tag: str = "validation") -> EvalReport:
    if len(test) == 0:
        raise InvalidConfig("test set is empty")
    return report(confusion(g.predict(test.X), test.y), split_tag)
