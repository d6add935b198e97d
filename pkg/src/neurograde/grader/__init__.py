"""Grade classification: SMO-trained linear SVM cascade and smoothing.

smo: sequential-minimal-optimization trainer for linear soft-margin SVMs,
     plus sigmoid probability calibration.
cascade: three one-vs-rest stages covering grades 1-3 with a grade-4
     default, robust feature normalization, and JSON model files.
temporal: moving-median smoothing and majority voting for grade series.
"""

from .cascade import (
    CascadeConfig,
    CascadeStage,
    FeatureNormalization,
    GradePrediction,
    GraderCascade,
    cascade_predict,
    cascade_predict_many,
    cascade_train,
    fit_normalization,
    load_cascade,
    save_cascade,
)
from .smo import (
    LinearSvmModel,
    dual_objective,
    fit_sigmoid,
    sigmoid_probability,
    smo_train,
)
from .temporal import majority_vote, median_smooth

__all__ = [
    "CascadeConfig",
    "CascadeStage",
    "FeatureNormalization",
    "GradePrediction",
    "GraderCascade",
    "LinearSvmModel",
    "cascade_predict",
    "cascade_predict_many",
    "cascade_train",
    "dual_objective",
    "fit_normalization",
    "fit_sigmoid",
    "load_cascade",
    "majority_vote",
    "median_smooth",
    "save_cascade",
    "sigmoid_probability",
    "smo_train",
]
