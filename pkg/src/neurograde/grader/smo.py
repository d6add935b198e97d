"""Linear soft-margin SVM trained by sequential minimal optimization.

The trainer solves the dual problem

    maximize   sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>
    subject to 0 <= alpha_i <= C  and  sum_i alpha_i y_i = 0

by repeatedly optimizing one pair of dual variables analytically.  Each
iteration picks the maximal-violating pair: with g_i = y_i - w . x_i, the
bias must satisfy b >= g_i for every row that could push its alpha up and
b <= g_j for every row that could pull its alpha down, so the most violated
pair is (argmax g over the first set, argmin g over the second).  Training
stops when max - min <= tol; placing the bias at the midpoint then leaves
every optimality condition satisfied within tol/2.  All ties break by row
index, so a given (X, y, C, tol) always produces the same model.

A Platt-style sigmoid fitted on the training decision values turns margins
into calibrated probabilities; `fit_sigmoid` implements the standard robust
Newton iteration with backtracking line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainError

__all__ = [
    "LinearSvmModel",
    "smo_train",
    "dual_objective",
    "fit_sigmoid",
    "sigmoid_probability",
]

_MIN_CURVATURE = 1e-12


@dataclass(frozen=True)
class LinearSvmModel:
    """Trained linear SVM: decision value is ``x @ weights + bias``."""

    weights: np.ndarray
    bias: float
    C: float
    support_indices: tuple[int, ...]
    alphas: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        a = np.asarray(self.alphas, dtype=float)
        w.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "alphas", a)
        if np.any(a < -1e-12) or np.any(a > self.C + 1e-12):
            raise TrainError("dual variables outside the box [0, C]")

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        """Signed margins for rows of `X` (1-D input gives one value)."""
        X = np.asarray(X, dtype=float)
        return X @ self.weights + self.bias


def _validate_training_set(X, y):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise TrainError("feature matrix must be 2-D (rows are examples)")
    if X.shape[0] != y.shape[0]:
        raise TrainError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    if not np.isfinite(X).all():
        raise TrainError("feature matrix contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainError("labels must be -1 or +1")
    if np.all(y > 0) or np.all(y < 0):
        raise TrainError("training labels contain a single class")
    return X, y


def dual_objective(alphas, X, y) -> float:
    """Dual objective value for a feasible `alphas` on the training set."""
    alphas = np.asarray(alphas, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    u = alphas * y
    v = X.T @ u
    return float(alphas.sum() - 0.5 * (v @ v))


def _kkt_violations(margins, alphas, C, tol):
    """(index, excess) for every row breaking its optimality condition."""
    out = []
    for i, m in enumerate(margins):
        a = alphas[i]
        if a <= 0.0:
            excess = (1.0 - tol) - m
        elif a >= C:
            excess = m - (1.0 + tol)
        else:
            excess = abs(m - 1.0) - tol
        if excess > 0.0:
            out.append((i, float(excess)))
    return out


def smo_train(X, y, C: float = 1.0, tol: float = 1e-3,
              max_passes: int = 100) -> LinearSvmModel:
    """Train a linear SVM on rows of `X` with labels `y` in {-1, +1}.

    `tol` bounds the allowed slack in the optimality conditions: at the
    returned solution every example satisfies

        margin >= 1 - tol   when its alpha is 0,
        margin <= 1 + tol   when its alpha is C,
        margin  = 1 +- tol  when its alpha is strictly inside (0, C).

    `max_passes` is an iteration budget in units of full sweeps: training
    may perform up to max_passes * n_examples pair updates before a
    TrainError reports the rows still violating optimality.  Training is
    fully deterministic for a given (X, y, C, tol).
    """
    X, y = _validate_training_set(X, y)
    if C <= 0:
        raise TrainError("box constraint C must be positive")
    n = len(y)
    K = X @ X.T
    alpha = np.zeros(n)
    v = np.zeros(n)  # kernel expansion K @ (alpha * y), i.e. w . x_i
    max_iter = max(0, int(max_passes)) * n
    converged = False
    for _ in range(max_iter):
        g = y - v
        can_up = (y > 0) & (alpha < C) | (y < 0) & (alpha > 0)
        can_dn = (y < 0) & (alpha < C) | (y > 0) & (alpha > 0)
        up = np.where(can_up, g, -np.inf)
        dn = np.where(can_dn, g, np.inf)
        i = int(np.argmax(up))
        j = int(np.argmin(dn))
        if up[i] - dn[j] <= tol:
            converged = True
            break
        yi, yj = y[i], y[j]
        s = yi * yj
        ai, aj = alpha[i], alpha[j]
        if s > 0:
            lo, hi = max(0.0, ai + aj - C), min(C, ai + aj)
        else:
            lo, hi = max(0.0, aj - ai), min(C, C + aj - ai)
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        # E_i - E_j = (v_i - y_i) - (v_j - y_j) = g_j - g_i; the Newton step
        # along the constraint line, clipped to the box.
        new_aj = aj + yj * (g[j] - g[i]) / max(eta, _MIN_CURVATURE)
        new_aj = min(max(new_aj, lo), hi)
        new_ai = ai + s * (aj - new_aj)
        if new_ai < 0.0:
            new_aj += s * new_ai
            new_ai = 0.0
        elif new_ai > C:
            new_aj += s * (new_ai - C)
            new_ai = C
        # Snap to the exact bounds: rounding dust like alpha = 5e-17 would
        # otherwise keep a row selectable while allowing only a zero step.
        snap = 1e-12 * C
        if new_ai < snap:
            new_ai = 0.0
        elif new_ai > C - snap:
            new_ai = C
        if new_aj < snap:
            new_aj = 0.0
        elif new_aj > C - snap:
            new_aj = C
        di = yi * (new_ai - ai)
        dj = yj * (new_aj - aj)
        if di == 0.0 and dj == 0.0:
            converged = True  # box-blocked to a standstill: report via KKT
            break
        alpha[i] = new_ai
        alpha[j] = new_aj
        v += di * K[:, i] + dj * K[:, j]
    v = K @ (alpha * y)  # drop incremental rounding before the final check
    g = y - v
    b_lo = float(np.max(np.where((y > 0) & (alpha < C) | (y < 0) & (alpha > 0),
                                 g, -np.inf)))
    b_hi = float(np.min(np.where((y < 0) & (alpha < C) | (y > 0) & (alpha > 0),
                                 g, np.inf)))
    bias = 0.5 * (b_lo + b_hi)
    violations = _kkt_violations(y * (v + bias), alpha, C, tol)
    if violations or not converged:
        worst = max((e for _, e in violations), default=0.0)
        raise TrainError(
            f"no convergence within {max_iter} pair updates: "
            f"{len(violations)} rows violate optimality, worst by {worst:.3g}"
        )
    alpha[alpha < 1e-12] = 0.0
    balance = float(np.dot(alpha, y))
    if abs(balance) > 1e-8:
        raise TrainError(f"dual equality constraint off by {balance:.3g}")
    weights = X.T @ (alpha * y)
    return LinearSvmModel(
        weights=weights,
        bias=bias,
        C=float(C),
        support_indices=tuple(int(i) for i in np.flatnonzero(alpha > 0.0)),
        alphas=alpha,
    )


def fit_sigmoid(scores, y, max_iter: int = 100, min_step: float = 1e-10,
                sigma: float = 1e-12) -> tuple[float, float]:
    """Fit (a, b) so that 1 / (1 + exp(a * score + b)) estimates P(y = +1).

    Newton iteration on the regularized cross-entropy with the usual
    out-of-sample targets (n+ + 1)/(n+ + 2) and 1/(n- + 2), backtracking
    the step until the objective decreases.  Deterministic.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if scores.shape != y.shape:
        raise TrainError("scores and labels differ in length")
    n_pos = int(np.sum(y > 0))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TrainError("calibration needs both classes")
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(y > 0, hi, lo)

    def objective(a: float, b: float) -> float:
        z = a * scores + b
        return float(np.sum(np.where(
            z >= 0,
            t * z + np.log1p(np.exp(-np.abs(z))),
            (t - 1.0) * z + np.log1p(np.exp(-np.abs(z))),
        )))

    a = 0.0
    b = math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = objective(a, b)
    for _ in range(max_iter):
        z = a * scores + b
        p = np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))),
                     1.0 / (1.0 + np.exp(-np.abs(z))))
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + float(np.sum(scores * scores * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(scores * d2))
        d1 = t - p
        g1 = float(np.sum(scores * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            new_a = a + step * da
            new_b = b + step * db
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step *= 0.5
        else:
            break
    return float(a), float(b)


def sigmoid_probability(score, a: float, b: float):
    """Calibrated P(y = +1) for decision values under fitted (a, b)."""
    z = a * np.asarray(score, dtype=float) + b
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    return float(out) if out.ndim == 0 else out
