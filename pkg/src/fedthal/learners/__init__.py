"""From-scratch local learners over 11-column binned feature vectors."""
from .bayes import NaiveBayesModel, fit_nb, predict_nb, train_nb
from .models import (
    KINDS,
    MODEL_FILE_VERSION,
    LocalModel,
    load_model,
    local_from_dict,
    local_to_dict,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .svm import LinearSvmModel, SvmHyper, fit_svm, predict_svm, train_svm
from .tree import DecisionTreeModel, DtHyper, entropy, fit_dt, predict_dt, train_dt

__all__ = [
    "KINDS", "MODEL_FILE_VERSION", "DecisionTreeModel", "DtHyper", "LinearSvmModel",
    "LocalModel", "NaiveBayesModel", "SvmHyper", "entropy", "fit_dt", "fit_nb", "fit_svm",
    "load_model", "local_from_dict", "local_to_dict", "model_from_dict", "model_to_dict",
    "predict_dt", "predict_nb", "predict_svm", "save_model", "train_dt", "train_nb", "train_svm",
]
