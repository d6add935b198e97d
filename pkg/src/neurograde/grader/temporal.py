"""Temporal post-processing for per-segment grade series.

Works on the output of any segment-level classifier: a moving median strips
isolated misgradings from an otherwise stable series, and majority voting
condenses a window of overlapping segment grades into one call.  Both
resolve ties toward the more severe (higher) grade, mirroring the clinical
preference for over- rather than under-grading.
"""

from __future__ import annotations

from collections import Counter

__all__ = ["median_smooth", "majority_vote"]


def median_smooth(grades, window_min: float = 3.5,
                  step_s: float = 30.0) -> list[int]:
    """Centered moving median over a time window of grades.

    `window_min` is the window length in minutes and `step_s` the stride
    between consecutive entries in seconds; the defaults cover 7 entries
    per window.  Windows shrink symmetrically at the series edges.  The
    upper median is used, so even-sized windows resolve toward severity
    and every output grade already occurs inside its window.
    """
    series = [int(g) for g in grades]
    if not series:
        return []
    if window_min <= 0 or step_s <= 0:
        raise ValueError("window and stride must be positive")
    width = max(1, round(window_min * 60.0 / step_s))
    half = width // 2
    out = []
    for k in range(len(series)):
        window = sorted(series[max(0, k - half):k + half + 1])
        out.append(window[len(window) // 2])
    return out


def majority_vote(grades) -> int:
    """Most frequent grade; ties resolve to the most severe contender."""
    counts = Counter(int(g) for g in grades)
    if not counts:
        raise ValueError("majority_vote needs at least one grade")
    return max(counts.items(), key=lambda item: (item[1], item[0]))[0]
