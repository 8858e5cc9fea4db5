"""LocalModel wrapper and the JSON model-file format.

Every file is a JSON object ``{"type": "dt"|"nb"|"svm", "version": 1, ...}``.
Floats are written with ``repr`` precision so a round trip is bit-exact.
Non-finite floats (an unseen class has log-prior -inf) are spelled as
strings.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import MalformedPayload, UnknownType, VersionMismatch
from .bayes import NaiveBayesModel
from .svm import LinearSvmModel, SvmHyper
from .tree import DecisionTreeModel, DtHyper, Node

MODEL_FILE_VERSION = 1
KINDS = ("dt", "nb", "svm")
_MODEL_TYPES = {"dt": DecisionTreeModel, "nb": NaiveBayesModel, "svm": LinearSvmModel}


@dataclass
class LocalModel:
    kind: str
    model: Union[DecisionTreeModel, NaiveBayesModel, LinearSvmModel]
    client_id: str = ""
    train_size: int = 0
    train_accuracy: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not isinstance(self.model, _MODEL_TYPES[self.kind]):
            raise TypeError(f"kind {self.kind!r} does not match {type(self.model).__name__}")

    def predict(self, X) -> np.ndarray:
        return self.model.predict(X)


def kind_of(model) -> str:
    for kind, cls in _MODEL_TYPES.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"not a model: {type(model).__name__}")


def json_float(x: float):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def from_json_float(x) -> float:
    return float(x)


def json_floats(arr) -> list:
    return [json_float(v) for v in np.asarray(arr, dtype=np.float64).ravel().tolist()]


# ---- decision tree ---------------------------------------------------------

def _node_to_dict(node: Node) -> dict:
    d = {"counts": list(node.counts)}
    if not node.is_leaf:
        d["feature"] = node.feature
        d["gain"] = json_float(node.gain)
        d["children"] = {str(k): _node_to_dict(node.children[k]) for k in sorted(node.children)}
    return d


def _node_from_dict(d: dict) -> Node:
    node = Node(counts=(int(d["counts"][0]), int(d["counts"][1])))
    if "feature" in d:
        node.feature = int(d["feature"])
        node.gain = from_json_float(d["gain"])
        node.children = {int(k): _node_from_dict(v) for k, v in d["children"].items()}
    return node


def _dt_to_dict(m: DecisionTreeModel) -> dict:
    return {
        "hyper": {"criterion": m.hyper.criterion, "max_depth": m.hyper.max_depth,
                  "min_leaf": m.hyper.min_leaf},
        "n_features": m.n_features,
        "feature_importances": json_floats(m.feature_importances),
        "root": _node_to_dict(m.root),
    }


def _dt_from_dict(d: dict) -> DecisionTreeModel:
    return DecisionTreeModel(
        root=_node_from_dict(d["root"]),
        hyper=DtHyper(**d["hyper"]),
        feature_importances=np.array([from_json_float(v) for v in d["feature_importances"]]),
        n_features=int(d["n_features"]),
    )


# ---- naive Bayes -----------------------------------------------------------

def _nb_to_dict(m: NaiveBayesModel) -> dict:
    return {
        "laplace_alpha": json_float(m.laplace_alpha),
        "bin_cardinality": list(m.bin_cardinality),
        "class_log_priors": json_floats(m.class_log_priors),
        "cond_log_prob": [[json_floats(p) for p in per_class] for per_class in m.cond_log_prob],
    }


def _nb_from_dict(d: dict) -> NaiveBayesModel:
    return NaiveBayesModel(
        class_log_priors=np.array([from_json_float(v) for v in d["class_log_priors"]]),
        cond_log_prob=[[np.array([from_json_float(v) for v in p]) for p in per_class]
                       for per_class in d["cond_log_prob"]],
        laplace_alpha=from_json_float(d["laplace_alpha"]),
        bin_cardinality=tuple(int(k) for k in d["bin_cardinality"]),
    )


# ---- linear SVM ------------------------------------------------------------

def svm_hyper_to_dict(h: SvmHyper) -> dict:
    return {"kernel": h.kernel, "gamma": json_float(h.gamma), "C": json_float(h.C), "epochs": h.epochs,
            "seed": h.seed, "encoding": h.encoding, "tol": json_float(h.tol)}


def svm_hyper_from_dict(d: dict) -> SvmHyper:
    return SvmHyper(C=from_json_float(d["C"]), epochs=int(d["epochs"]), seed=int(d["seed"]),
                    kernel=d["kernel"], gamma=from_json_float(d["gamma"]), encoding=d["encoding"],
                    tol=from_json_float(d.get("tol", 1e-4)))


def _svm_to_dict(m: LinearSvmModel) -> dict:
    return {
        "hyper": svm_hyper_to_dict(m.hyper),
        "w": json_floats(m.w),
        "b": json_float(m.b),
        "support_vectors": [json_floats(sv) for sv in m.support_vectors],
        "dual_coefs": json_floats(m.dual_coefs),
        "support_indices": [int(i) for i in m.support_indices],
    }


def _svm_from_dict(d: dict) -> LinearSvmModel:
    w = np.array([from_json_float(v) for v in d["w"]])
    svs = d["support_vectors"]
    return LinearSvmModel(
        w=w,
        b=from_json_float(d["b"]),
        support_vectors=(np.array([[from_json_float(v) for v in sv] for sv in svs]) if svs
                         else np.zeros((0, len(w)))),
        dual_coefs=np.array([from_json_float(v) for v in d["dual_coefs"]]),
        hyper=svm_hyper_from_dict(d["hyper"]),
        support_indices=np.array(d.get("support_indices", []), dtype=np.int64),
    )


_TO = {"dt": _dt_to_dict, "nb": _nb_to_dict, "svm": _svm_to_dict}
_FROM = {"dt": _dt_from_dict, "nb": _nb_from_dict, "svm": _svm_from_dict}


def model_to_dict(model, meta: Optional[LocalModel] = None) -> dict:
    kind = kind_of(model)
    d = {"type": kind, "version": MODEL_FILE_VERSION}
    d.update(_TO[kind](model))
    if meta is not None:
        d["meta"] = {"client_id": meta.client_id, "train_size": meta.train_size,
                     "train_accuracy": json_float(meta.train_accuracy)}
    return d


def model_from_dict(d: dict):
    if not isinstance(d, dict) or "type" not in d:
        raise MalformedPayload("model object lacks a 'type' field")
    kind = d["type"]
    if kind not in _FROM:
        raise UnknownType(f"unknown model type {kind!r}")
    if d.get("version") != MODEL_FILE_VERSION:
        raise VersionMismatch(f"model file version {d.get('version')!r}, expected {MODEL_FILE_VERSION}")
    try:
        return _FROM[kind](d)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedPayload(f"bad {kind} model: {exc}") from exc


def local_to_dict(lm: LocalModel) -> dict:
    return model_to_dict(lm.model, meta=lm)


def local_from_dict(d: dict) -> LocalModel:
    model = model_from_dict(d)
    meta = d.get("meta", {})
    return LocalModel(kind=d["type"], model=model, client_id=meta.get("client_id", ""),
                      train_size=int(meta.get("train_size", 0)),
                      train_accuracy=from_json_float(meta.get("train_accuracy", 0.0)))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_model(model_or_local, path: Union[str, Path]) -> None:
    if isinstance(model_or_local, LocalModel):
        d = local_to_dict(model_or_local)
    else:
        d = model_to_dict(model_or_local)
    Path(path).write_text(dumps(d), encoding="utf-8")


def load_model(path: Union[str, Path]):
    """Load a model file; returns a LocalModel when the file carries metadata."""
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedPayload(f"{path}: {exc}") from exc
    return local_from_dict(d) if "meta" in d else model_from_dict(d)
