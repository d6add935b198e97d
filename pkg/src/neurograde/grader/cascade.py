"""Four-grade ordinal classifier built from three one-vs-rest linear SVMs.

Stages are evaluated in grade order (1, 2, 3); the first stage whose
calibrated probability exceeds 0.5 claims the example, and anything that
clears no stage falls through to grade 4 with probability 1 - max(stage
scores).  Features are normalized per column by median and interquartile
range fitted on the training data, which makes predictions invariant to
any positive affine rescaling applied consistently to train and test.

Training sorts rows into a canonical order (by grade, then feature values)
before the optimizer runs, so shuffling the training set cannot change the
fitted weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParseError, PredictError, TrainError
from .smo import LinearSvmModel, fit_sigmoid, sigmoid_probability, smo_train

__all__ = [
    "CascadeConfig",
    "FeatureNormalization",
    "CascadeStage",
    "GraderCascade",
    "GradePrediction",
    "cascade_train",
    "cascade_predict",
    "cascade_predict_many",
    "save_cascade",
    "load_cascade",
]

GRADES = (1, 2, 3, 4)
STAGE_GRADES = (1, 2, 3)
RESIDUAL_GRADE = 4
MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CascadeConfig:
    """Hyperparameters shared by the three per-grade optimizers."""

    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 100


DEFAULT_CASCADE_CONFIG = CascadeConfig()


@dataclass(frozen=True)
class FeatureNormalization:
    """Per-feature robust centering: z = (x - median) / IQR.

    Degenerate columns (IQR of 0, or no finite values at all) get a scale
    of 1 so they pass through; any non-finite normalized value becomes 0,
    which lets prediction tolerate occasional undefined features.
    """

    median: np.ndarray
    iqr: np.ndarray

    def __post_init__(self) -> None:
        med = np.asarray(self.median, dtype=float)
        iqr = np.asarray(self.iqr, dtype=float)
        med.flags.writeable = False
        iqr.flags.writeable = False
        object.__setattr__(self, "median", med)
        object.__setattr__(self, "iqr", iqr)
        if med.shape != iqr.shape or med.ndim != 1:
            raise TrainError("normalization vectors must be 1-D and equal length")
        if np.any(iqr <= 0) or not np.isfinite(iqr).all() or not np.isfinite(med).all():
            raise TrainError("normalization statistics must be finite with positive scale")

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        z = (X - self.median) / self.iqr
        return np.where(np.isfinite(z), z, 0.0)


def fit_normalization(X: np.ndarray) -> FeatureNormalization:
    """Median/IQR statistics per column, ignoring NaNs."""
    X = np.asarray(X, dtype=float)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(X, axis=0)
        q75, q25 = np.nanpercentile(X, [75.0, 25.0], axis=0)
    iqr = q75 - q25
    med = np.where(np.isfinite(med), med, 0.0)
    iqr = np.where(np.isfinite(iqr) & (iqr > 0), iqr, 1.0)
    return FeatureNormalization(median=med, iqr=iqr)


@dataclass(frozen=True)
class CascadeStage:
    """One grade-vs-rest scorer with its probability calibration."""

    grade: int
    weights: np.ndarray
    bias: float
    calib_a: float
    calib_b: float
    svm: LinearSvmModel | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def probability(self, z: np.ndarray):
        """Calibrated P(this grade) for normalized feature rows `z`."""
        return sigmoid_probability(
            np.asarray(z, dtype=float) @ self.weights + self.bias,
            self.calib_a,
            self.calib_b,
        )


@dataclass(frozen=True)
class GraderCascade:
    feature_names: tuple[str, ...]
    normalization: FeatureNormalization
    stages: tuple[CascadeStage, ...]

    def __post_init__(self) -> None:
        if len(self.stages) != len(STAGE_GRADES):
            raise TrainError(f"expected {len(STAGE_GRADES)} stages, got {len(self.stages)}")
        grades = [s.grade for s in self.stages]
        if len(set(grades)) != len(grades):
            raise TrainError("stage target grades must be distinct")
        if len(self.normalization.median) != len(self.feature_names):
            raise TrainError("normalization length does not match feature names")
        for s in self.stages:
            if len(s.weights) != len(self.feature_names):
                raise TrainError("stage weight length does not match feature names")


@dataclass(frozen=True)
class GradePrediction:
    epoch_id: str
    grade: int
    probability: float

    def __post_init__(self) -> None:
        if self.grade not in GRADES:
            raise PredictError(f"grade {self.grade} outside {GRADES}")
        if not 0.0 <= self.probability <= 1.0:
            raise PredictError(f"probability {self.probability} outside [0, 1]")


def _matrix_from_vectors(vectors, feature_names):
    """Coerce feature input to (X, names).

    Accepts a 2-D array (optionally with explicit `feature_names`), or a
    sequence of mappings / FeatureVector-like objects sharing one name set.
    """
    if isinstance(vectors, np.ndarray) or (
        len(vectors) > 0
        and not isinstance(vectors[0], dict)
        and not hasattr(vectors[0], "values")
    ):
        X = np.asarray(vectors, dtype=float)
        if X.ndim != 2:
            raise TrainError("feature matrix must be 2-D")
        if feature_names is None:
            names = tuple(f"f{k:03d}" for k in range(X.shape[1]))
        else:
            names = tuple(str(n) for n in feature_names)
            if len(names) != X.shape[1]:
                raise TrainError(
                    f"{len(names)} feature names for {X.shape[1]} columns"
                )
        return X, names

    rows = []
    names = None
    for k, vec in enumerate(vectors):
        values = vec if isinstance(vec, dict) else vec.values
        if names is None:
            names = tuple(values.keys()) if feature_names is None \
                else tuple(str(n) for n in feature_names)
        missing = [n for n in names if n not in values]
        if missing:
            raise TrainError(
                f"feature vector {k} is missing: {', '.join(missing)}"
            )
        rows.append([float(values[n]) for n in names])
    if not rows:
        raise TrainError("no feature vectors given")
    return np.asarray(rows, dtype=float), names


def cascade_train(vectors, grades, config: CascadeConfig = DEFAULT_CASCADE_CONFIG,
                  feature_names=None) -> GraderCascade:
    """Fit the three-stage grader on labeled feature vectors.

    All four grades must appear in `grades`.  Normalization statistics are
    fitted on this data only; prediction never updates them.
    """
    X, names = _matrix_from_vectors(vectors, feature_names)
    g = np.asarray(grades, dtype=int)
    if g.shape != (X.shape[0],):
        raise TrainError(f"{X.shape[0]} feature rows but {g.size} grades")
    present = set(int(v) for v in np.unique(g))
    if not present <= set(GRADES):
        raise TrainError(f"grades outside {GRADES}: {sorted(present - set(GRADES))}")
    absent = sorted(set(GRADES) - present)
    if absent:
        raise TrainError(f"training data is missing grade(s) {absent}")

    normalization = fit_normalization(X)
    Z = normalization.transform(X)
    # Canonical row order: by grade, then feature values left to right.
    # Makes the fit independent of how the caller happened to order rows.
    keys = tuple(Z[:, c] for c in range(Z.shape[1] - 1, -1, -1)) + (g,)
    order = np.lexsort(keys)
    Z = Z[order]
    g_sorted = g[order]

    stages = []
    for target in STAGE_GRADES:
        y = np.where(g_sorted == target, 1.0, -1.0)
        svm = smo_train(Z, y, C=config.C, tol=config.tol,
                        max_passes=config.max_passes)
        scores = svm.decision_function(Z)
        calib_a, calib_b = fit_sigmoid(scores, y)
        stages.append(CascadeStage(
            grade=target,
            weights=svm.weights,
            bias=svm.bias,
            calib_a=calib_a,
            calib_b=calib_b,
            svm=svm,
        ))
    return GraderCascade(
        feature_names=names,
        normalization=normalization,
        stages=tuple(stages),
    )


def _row_from_features(model: GraderCascade, x) -> np.ndarray:
    if isinstance(x, dict) or hasattr(x, "values") and not isinstance(x, np.ndarray):
        values = x if isinstance(x, dict) else x.values
        missing = [n for n in model.feature_names if n not in values]
        if missing:
            raise PredictError(f"missing features: {', '.join(missing)}")
        return np.asarray([float(values[n]) for n in model.feature_names])
    row = np.asarray(x, dtype=float).ravel()
    if row.size != len(model.feature_names):
        raise PredictError(
            f"expected {len(model.feature_names)} features, got {row.size}"
        )
    return row


def cascade_predict(model: GraderCascade, x, epoch_id: str = "") -> GradePrediction:
    """Grade one feature vector (mapping, FeatureVector, or plain array)."""
    if not isinstance(epoch_id, str):
        raise PredictError("epoch_id must be a string")
    if hasattr(x, "epoch_id") and not epoch_id:
        epoch_id = x.epoch_id
    row = _row_from_features(model, x)
    z = model.normalization.transform(row)
    best = 0.0
    for stage in model.stages:
        p = float(stage.probability(z))
        if p > 0.5:
            return GradePrediction(epoch_id=epoch_id, grade=stage.grade,
                                   probability=p)
        best = max(best, p)
    return GradePrediction(
        epoch_id=epoch_id,
        grade=RESIDUAL_GRADE,
        probability=min(max(1.0 - best, 0.0), 1.0),
    )


def cascade_predict_many(model: GraderCascade, vectors,
                         epoch_ids=None) -> list[GradePrediction]:
    """Grade a sequence of feature vectors in order."""
    vectors = list(vectors)
    if epoch_ids is None:
        epoch_ids = [getattr(v, "epoch_id", "") for v in vectors]
    epoch_ids = [str(e) for e in epoch_ids]
    if len(epoch_ids) != len(vectors):
        raise PredictError(
            f"{len(vectors)} feature vectors but {len(epoch_ids)} epoch ids"
        )
    return [cascade_predict(model, v, epoch_id=e)
            for v, e in zip(vectors, epoch_ids)]


def save_cascade(model: GraderCascade, path) -> None:
    """Write the model as a self-describing JSON document."""
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "feature_names": list(model.feature_names),
        "normalization": {
            "median": [float(v) for v in model.normalization.median],
            "iqr": [float(v) for v in model.normalization.iqr],
        },
        "stages": [
            {
                "grade": stage.grade,
                "weights": [float(v) for v in stage.weights],
                "bias": float(stage.bias),
                "calibration": {"a": float(stage.calib_a),
                                "b": float(stage.calib_b)},
            }
            for stage in model.stages
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="ascii")


def load_cascade(path) -> GraderCascade:
    """Read a model written by `save_cascade`, validating its shape."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ParseError(f"unreadable model file {path.name}: {exc}") from exc
    try:
        version = doc["schema_version"]
        if version != MODEL_SCHEMA_VERSION:
            raise ParseError(
                f"model schema version {version} not supported "
                f"(expected {MODEL_SCHEMA_VERSION})"
            )
        names = tuple(str(n) for n in doc["feature_names"])
        normalization = FeatureNormalization(
            median=np.asarray(doc["normalization"]["median"], dtype=float),
            iqr=np.asarray(doc["normalization"]["iqr"], dtype=float),
        )
        stages = tuple(
            CascadeStage(
                grade=int(s["grade"]),
                weights=np.asarray(s["weights"], dtype=float),
                bias=float(s["bias"]),
                calib_a=float(s["calibration"]["a"]),
                calib_b=float(s["calibration"]["b"]),
            )
            for s in doc["stages"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model file {path.name}: {exc}") from exc
    try:
        return GraderCascade(feature_names=names, normalization=normalization,
                             stages=stages)
    except TrainError as exc:
        raise ParseError(f"inconsistent model file {path.name}: {exc}") from exc
