"""Clustered network information criterion (NICc) toolkit.

Fits linear and logistic regression on clustered data, scores models with
AIC, BIC, the network information criterion (NIC), and its clustered
variant (NICc), validates them against cluster-based cross-validated
deviance, and runs forward stepwise selection and simulation studies on
top of those pieces.
"""

from . import errors
from .criteria import (
    CriterionValue,
    aic,
    bic,
    clustered_score_covariance,
    criterion_se,
    nic,
    nicc,
    score_covariance,
    trace_solve,
)
from .crossval import CvResult, kfold_cluster_deviance, loo_cluster_deviance
from .data import Dataset
from .glm import GlmFit, fit_glm, observed_information, predict_loglik, score_matrix
from .io import read_dataset, write_dataset
from .selection import (
    ModelChoice,
    SelectionPath,
    SelectionStep,
    forward_path,
    jaccard_index,
    make_criterion,
    model_size_error,
    select_1se,
    select_min,
)
from .simulation import (
    DesignPoint,
    SimConfig,
    SimTruth,
    enumerate_design,
    generate,
    iteration_seed,
    polynomial_candidates,
    vitals_like_table,
)

__version__ = "0.1.0"

__all__ = [
    "CriterionValue",
    "CvResult",
    "Dataset",
    "DesignPoint",
    "GlmFit",
    "ModelChoice",
    "SelectionPath",
    "SelectionStep",
    "SimConfig",
    "SimTruth",
    "aic",
    "bic",
    "clustered_score_covariance",
    "criterion_se",
    "enumerate_design",
    "errors",
    "fit_glm",
    "forward_path",
    "generate",
    "iteration_seed",
    "jaccard_index",
    "kfold_cluster_deviance",
    "loo_cluster_deviance",
    "make_criterion",
    "model_size_error",
    "nic",
    "nicc",
    "observed_information",
    "polynomial_candidates",
    "predict_loglik",
    "read_dataset",
    "score_covariance",
    "score_matrix",
    "select_1se",
    "select_min",
    "trace_solve",
    "vitals_like_table",
    "write_dataset",
]
