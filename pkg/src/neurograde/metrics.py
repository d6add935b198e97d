"""Ordinal grading metrics.

Confusion matrices over the four background grades, the linear penalty
weighting for errors beyond one grade, multiclass Matthews correlation
(the R_K statistic), macro precision/recall/F1, Cohen's kappa, bootstrap
confidence intervals, ensemble majority voting, and weighted leaderboard
scores.

All computations use plain Python arithmetic: inputs are short grade
vectors and 4x4 matrices, and avoiding array overhead keeps exhaustive
property sweeps (millions of tiny evaluations) fast.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CiError, ConfigError, MetricError

GRADES = (1, 2, 3, 4)

#: Ordinal penalty weights: 1 on and adjacent to the diagonal, growing with
#: grade distance, i.e. w[i][j] = max(1, |i - j|).
WEIGHT_MATRIX: tuple[tuple[int, ...], ...] = tuple(
    tuple(max(1, abs(i - j)) for j in range(4)) for i in range(4)
)


@dataclass
class ConfusionMatrix:
    """4x4 counts with rows = true grade, columns = predicted grade."""

    counts: list[list[float]]

    @property
    def n(self) -> float:
        return sum(sum(row) for row in self.counts)

    def row_sums(self) -> list[float]:
        return [sum(row) for row in self.counts]

    def col_sums(self) -> list[float]:
        return [sum(self.counts[i][j] for i in range(4)) for j in range(4)]

    def trace(self) -> float:
        return sum(self.counts[i][i] for i in range(4))


def _check_grades(name: str, values) -> list[int]:
    out = []
    for v in values:
        iv = int(v)
        if iv != v or iv not in GRADES:
            raise MetricError(f"{name} contains grade {v!r}, expected one of {GRADES}")
        out.append(iv)
    return out


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Count matrix: counts[i][j] = #\\{k : true=i+1, pred=j+1\\}."""
    if len(y_true) != len(y_pred):
        raise MetricError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if len(y_true) == 0:
        raise MetricError("empty label vectors")
    t = _check_grades("y_true", y_true)
    p = _check_grades("y_pred", y_pred)
    counts = [[0.0] * 4 for _ in range(4)]
    for ti, pi in zip(t, p):
        counts[ti - 1][pi - 1] += 1.0
    return ConfusionMatrix(counts)


def weighted_cm(cm: ConfusionMatrix) -> ConfusionMatrix:
    """Elementwise product with the ordinal penalty weights."""
    return ConfusionMatrix(
        [[cm.counts[i][j] * WEIGHT_MATRIX[i][j] for j in range(4)] for i in range(4)]
    )


def mcc(cm: ConfusionMatrix) -> float:
    """Multiclass Matthews correlation (R_K) of a confusion matrix.

    R_K = (c*s - sum_k p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))
    with c the trace, s the total, t_k row sums and p_k column sums.
    Returns 0.0 when either variance term vanishes.
    """
    v = _mcc_raw(cm)
    return 0.0 if math.isnan(v) else v


def _mcc_raw(cm: ConfusionMatrix) -> float:
    """R_K with NaN (not the 0.0 convention) on a degenerate denominator."""
    if cm.n <= 0:
        raise MetricError("empty confusion matrix")
    t = cm.row_sums()
    p = cm.col_sums()
    s = cm.n
    c = cm.trace()
    num = c * s - (p[0] * t[0] + p[1] * t[1] + p[2] * t[2] + p[3] * t[3])
    var_p = s * s - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3])
    var_t = s * s - (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3])
    if var_p <= 0 or var_t <= 0:
        return math.nan
    return num / math.sqrt(var_p * var_t)


def weighted_mcc(y_true, y_pred) -> float:
    """R_K on the penalty-weighted confusion matrix (the leaderboard metric)."""
    return mcc(weighted_cm(confusion(y_true, y_pred)))


def unweighted_mcc(y_true, y_pred) -> float:
    return mcc(confusion(y_true, y_pred))


def prf_accuracy(cm: ConfusionMatrix) -> dict[str, float]:
    """Accuracy plus macro precision/recall/F1.

    Macro averages run over the active classes (nonzero row or column).
    Within that set a class with zero support contributes 0 to recall and a
    class never predicted contributes 0 to precision; such classes are listed
    under ``zero_division_classes``.
    """
    if cm.n <= 0:
        raise MetricError("empty confusion matrix")
    rows = cm.row_sums()
    cols = cm.col_sums()
    active = [k for k in range(4) if rows[k] > 0 or cols[k] > 0]
    flagged = []
    precisions, recalls, f1s = [], [], []
    for k in active:
        tp = cm.counts[k][k]
        if cols[k] > 0:
            prec = tp / cols[k]
        else:
            prec = 0.0
            flagged.append(k + 1)
        if rows[k] > 0:
            rec = tp / rows[k]
        else:
            rec = 0.0
            flagged.append(k + 1)
        f1 = 2 * prec * rec / (prec + rec) if (prec + rec) > 0 else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    m = len(active)
    return {
        "accuracy": cm.trace() / cm.n,
        "precision": sum(precisions) / m,
        "recall": sum(recalls) / m,
        "f1": sum(f1s) / m,
        "zero_division_classes": sorted(set(flagged)),
    }


def accuracy(y_true, y_pred) -> float:
    return prf_accuracy(confusion(y_true, y_pred))["accuracy"]


def macro_f1(y_true, y_pred) -> float:
    return prf_accuracy(confusion(y_true, y_pred))["f1"]


def macro_precision(y_true, y_pred) -> float:
    return prf_accuracy(confusion(y_true, y_pred))["precision"]


def macro_recall(y_true, y_pred) -> float:
    return prf_accuracy(confusion(y_true, y_pred))["recall"]


def cohen_kappa(a, b) -> float:
    """Chance-corrected agreement between two grade assignments."""
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise MetricError("empty label vectors")
    ga = _check_grades("a", a)
    gb = _check_grades("b", b)
    n = len(ga)
    po = sum(1 for x, y in zip(ga, gb) if x == y) / n
    pa = [sum(1 for x in ga if x == g) / n for g in GRADES]
    pb = [sum(1 for x in gb if x == g) / n for g in GRADES]
    pe = sum(x * y for x, y in zip(pa, pb))
    if pe >= 1.0:
        # both raters constant on the same class, so agreement is total
        return 1.0
    return (po - pe) / (1.0 - pe)


# --- bootstrap intervals ------------------------------------------------------


def bootstrap_ci(
    metric,
    y_true,
    y_pred,
    B: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    subjects=None,
) -> tuple[float, float]:
    """Percentile bootstrap interval for ``metric(y_true, y_pred)``.

    Resamples epochs with replacement (or whole subjects when ``subjects``
    gives a per-epoch subject id). Resamples where the metric is undefined
    (NaN or MetricError) are skipped and counted; more than 20% of them
    raises CiError. Deterministic per seed: resample i draws from a
    generator seeded with (seed, i).
    """
    n = len(y_true)
    if n != len(y_pred):
        raise MetricError(f"length mismatch: {n} vs {len(y_pred)}")
    if n < 10:
        raise MetricError(f"need at least 10 epochs for a bootstrap interval, got {n}")
    if subjects is not None and len(subjects) != n:
        raise MetricError("subjects must align with the label vectors")

    yt = list(y_true)
    yp = list(y_pred)
    by_subject: dict = {}
    if subjects is not None:
        for i, s in enumerate(subjects):
            by_subject.setdefault(s, []).append(i)
    subject_ids = sorted(by_subject) if subjects is not None else None

    values = []
    degenerate = 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        if subject_ids is None:
            idx = rng.integers(0, n, size=n)
        else:
            picked = rng.integers(0, len(subject_ids), size=len(subject_ids))
            idx = [i for k in picked for i in by_subject[subject_ids[k]]]
        try:
            v = metric([yt[i] for i in idx], [yp[i] for i in idx])
        except MetricError:
            degenerate += 1
            continue
        if v is None or (isinstance(v, float) and math.isnan(v)):
            degenerate += 1
            continue
        values.append(v)

    if degenerate > 0.2 * B:
        raise CiError(f"{degenerate}/{B} bootstrap resamples were degenerate")
    values.sort()
    lo_q = (1.0 - level) / 2.0
    hi_q = 1.0 - lo_q
    return (_percentile(values, lo_q), _percentile(values, hi_q))


def _percentile(sorted_values: list[float], q: float) -> float:
    """Linear-interpolation percentile of an already sorted list."""
    m = len(sorted_values)
    if m == 0:
        raise CiError("no valid bootstrap resamples")
    if m == 1:
        return sorted_values[0]
    pos = q * (m - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, m - 1)
    frac = pos - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


# --- ensembling and leaderboard scores ---------------------------------------


def majority_grade(votes) -> int:
    """Modal grade; ties broken toward the more severe (higher) grade."""
    tally = {g: 0 for g in GRADES}
    for v in _check_grades("votes", votes):
        tally[v] += 1
    best = max(tally.values())
    return max(g for g in GRADES if tally[g] == best)


def ensemble_majority(preds: list[list[int]]) -> list[int]:
    """Per-epoch majority vote across model prediction vectors."""
    if len(preds) < 2:
        raise MetricError("need at least 2 models to ensemble")
    n = len(preds[0])
    for k, p in enumerate(preds):
        if len(p) != n:
            raise MetricError(f"prediction vector {k} has length {len(p)}, expected {n}")
    return [majority_grade([p[i] for p in preds]) for i in range(n)]


def leaderboard_score(metric_values: dict[str, float], weights: dict[str, float]) -> float:
    """Weighted sum of metric values; a single-metric config is weight 1."""
    if not weights:
        raise ConfigError("ranking weights must not be empty")
    for key, w in weights.items():
        if key not in metric_values:
            raise ConfigError(f"unknown metric key in ranking weights: {key!r}")
        if w < 0:
            raise ConfigError(f"ranking weight for {key!r} must be nonnegative")
    return sum(w * metric_values[k] for k, w in weights.items())


# --- full report ---------------------------------------------------------------

#: Leaderboard column order used by reports and the score CLI.
REPORT_METRICS = ("wmcc", "accuracy", "f1", "precision", "recall")

# bootstrap resamples where R_K is 0/0 count as degenerate instead of
# taking the defined-zero convention, so perfect predictions get CI (1, 1)
_METRIC_FUNCS = {
    "wmcc": lambda t, p: _mcc_raw(weighted_cm(confusion(t, p))),
    "mcc": lambda t, p: _mcc_raw(confusion(t, p)),
    "accuracy": accuracy,
    "f1": macro_f1,
    "precision": macro_precision,
    "recall": macro_recall,
}


@dataclass
class MetricReport:
    """Point values with 95% bootstrap intervals for the scoring metrics."""

    values: dict[str, float]
    intervals: dict[str, tuple[float, float]]
    kappa: float | None = None
    flags: dict[str, object] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "metrics": {
                name: {
                    "value": self.values[name],
                    "ci_low": self.intervals[name][0],
                    "ci_high": self.intervals[name][1],
                }
                for name in self.values
            },
        }
        if self.kappa is not None:
            payload["kappa"] = self.kappa
        if self.flags:
            payload["flags"] = self.flags
        return json.dumps(payload, sort_keys=True)


def evaluate(
    y_true,
    y_pred,
    B: int = 1000,
    seed: int = 0,
    with_kappa: bool = False,
    subjects=None,
) -> MetricReport:
    """Compute every scoring metric with bootstrap intervals.

    The percentile interval is widened, if needed, to contain the point
    estimate so reports never show a value outside its own interval.
    """
    cm = confusion(y_true, y_pred)
    prf = prf_accuracy(cm)
    values = {
        "wmcc": mcc(weighted_cm(cm)),
        "mcc": mcc(cm),
        "accuracy": prf["accuracy"],
        "f1": prf["f1"],
        "precision": prf["precision"],
        "recall": prf["recall"],
    }
    intervals = {}
    for name, fn in _METRIC_FUNCS.items():
        lo, hi = bootstrap_ci(fn, y_true, y_pred, B=B, seed=seed, subjects=subjects)
        intervals[name] = (min(lo, values[name]), max(hi, values[name]))
    flags = {}
    if prf["zero_division_classes"]:
        flags["zero_division_classes"] = prf["zero_division_classes"]
    if math.isnan(_mcc_raw(cm)) or math.isnan(_mcc_raw(weighted_cm(cm))):
        flags["degenerate_mcc"] = True
    kappa = cohen_kappa(y_true, y_pred) if with_kappa else None
    return MetricReport(values=values, intervals=intervals, kappa=kappa, flags=flags)
