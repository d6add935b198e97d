"""Burst detection and inter-burst-interval statistics.

A burst is sustained envelope activity: the analytic envelope is smoothed
with a 1 s moving mean and thresholded at 1.5x the epoch-mean smoothed
envelope, clamped to [5, 25] µV. The clamp keeps the threshold between the
amplitude of suppressed background (so quiescent epochs yield no bursts)
and that of continuous activity (so a sustained trace counts as one long
burst rather than as suppression relative to itself). Runs shorter than
1 s are discarded and gaps under 0.5 s are bridged. Inter-burst intervals
are the gaps between consecutive bursts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal as sps

from ..errors import FeatureError


@dataclass(frozen=True)
class BurstAnnotation:
    """Ordered disjoint burst intervals in seconds, with the gaps between them."""

    bursts: tuple[tuple[float, float], ...]
    ibis: tuple[float, ...]

    def __post_init__(self):
        for (a0, a1), (b0, b1) in zip(self.bursts, self.bursts[1:]):
            if not (a0 < a1 <= b0 < b1):
                raise FeatureError("burst intervals must be ordered and disjoint")

    def total_burst_time(self) -> float:
        return sum(e - s for s, e in self.bursts)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """[start, end) index pairs of True runs."""
    padded = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(padded == 1)
    ends = np.flatnonzero(padded == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def detect_bursts(
    x,
    fs: float,
    threshold_factor: float = 1.5,
    floor: float = 5.0,
    ceiling: float = 25.0,
    min_burst: float = 1.0,
    merge_gap: float = 0.5,
    smooth: float = 1.0,
) -> BurstAnnotation:
    """Envelope-threshold burst detector on a broadband epoch signal."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 16:
        raise FeatureError(f"need a 1-D signal of at least 16 samples, got shape {arr.shape}")
    env = np.abs(sps.hilbert(arr))
    width = max(1, int(round(smooth * fs)))
    smoothed = ndimage.uniform_filter1d(env, size=width, mode="nearest")
    threshold = max(min(threshold_factor * float(smoothed.mean()), ceiling), floor)
    runs = _runs(smoothed >= threshold)

    merged: list[list[int]] = []
    gap = merge_gap * fs
    for start, end in runs:
        if merged and start - merged[-1][1] < gap:
            merged[-1][1] = end
        else:
            merged.append([start, end])

    min_samples = min_burst * fs
    bursts = tuple(
        (start / fs, end / fs) for start, end in merged if end - start >= min_samples
    )
    ibis = tuple(b[0] - a[1] for a, b in zip(bursts, bursts[1:]))
    return BurstAnnotation(bursts=bursts, ibis=ibis)


def ibi_features(ann: BurstAnnotation, epoch_len: float) -> dict[str, float]:
    """IBI percentile/median, burst time percentage, and burst count.

    Percentile features are NaN (flagged undefined) with fewer than 2 IBIs.
    """
    if epoch_len <= 0:
        raise FeatureError(f"epoch length must be positive, got {epoch_len}")
    if len(ann.ibis) >= 2:
        ibis = np.asarray(ann.ibis)
        p95 = float(np.percentile(ibis, 95))
        median = float(np.median(ibis))
    else:
        p95 = float("nan")
        median = float("nan")
    return {
        "p95": p95,
        "median": median,
        "burst_percentage": 100.0 * ann.total_burst_time() / epoch_len,
        "num_bursts": float(len(ann.bursts)),
    }
