"""Gramian angular summation field encoding of RMS-transformed EEG.

A window is min-max rescaled to [-1, 1], mapped to angles phi = arccos, and
expanded into the matrix cos(phi_i + phi_j). Stacks of three montage
channels form RGB-style images after bilinear resizing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dsp import filter_bandpass_cheby2, filter_notch, resample, rms
from ..eeg_io import MONTAGE_GASF3, MontageSpec, Recording, derive_montage
from ..errors import FeatureError, MontageError


@dataclass(frozen=True)
class GasfImage:
    """Symmetric angular-sum matrix with entries in [-1, 1]."""

    matrix: np.ndarray
    phi: np.ndarray
    degenerate: bool = False


def gasf_encode(window) -> GasfImage:
    """Encode one sample window as a GASF matrix.

    A constant window has no range to rescale: it maps to all zeros, giving
    phi = pi/2 everywhere and a matrix of -1, flagged degenerate.
    """
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise FeatureError(f"need a 1-D window of at least 2 samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise FeatureError("window contains non-finite values")
    lo, hi = float(x.min()), float(x.max())
    degenerate = hi == lo
    if degenerate:
        rescaled = np.zeros_like(x)
    else:
        rescaled = np.clip((2.0 * x - hi - lo) / (hi - lo), -1.0, 1.0)
    phi = np.arccos(rescaled)
    matrix = np.cos(phi[:, None] + phi[None, :])
    return GasfImage(matrix=matrix, phi=phi, degenerate=degenerate)


def resize_bilinear(img, target: int) -> np.ndarray:
    """Square bilinear resize with corner alignment.

    Output values are convex combinations of inputs, so the range never
    grows, and linear ramps stay linear.
    """
    mat = np.asarray(img, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise FeatureError(f"need a square matrix, got shape {mat.shape}")
    if target < 1:
        raise FeatureError(f"target size must be at least 1, got {target}")
    n = mat.shape[0]
    if n == target:
        return mat.copy()
    if target == 1:
        pos = np.array([(n - 1) / 2.0])
    elif n == 1:
        pos = np.zeros(target)
    else:
        pos = np.arange(target) * (n - 1) / (target - 1)
    i0 = np.floor(pos).astype(int)
    i1 = np.minimum(i0 + 1, n - 1)
    frac = pos - i0
    rows = mat[i0][:, i1] * frac[None, :] + mat[i0][:, i0] * (1 - frac[None, :])
    rows1 = mat[i1][:, i1] * frac[None, :] + mat[i1][:, i0] * (1 - frac[None, :])
    return rows * (1 - frac[:, None]) + rows1 * frac[:, None]


def gasf_stack(
    epoch,
    montage: MontageSpec | None = MONTAGE_GASF3,
    window_samples: int = 384,
    rms_window: float = 1.0,
    target: int = 224,
    band: tuple[float, float] = (0.5, 12.8),
    notch_hz: float = 50.0,
    fs_out: float = 32.0,
) -> list[np.ndarray]:
    """Encode an epoch as a sequence of stacked per-channel GASF images.

    Conditioning: bandpass, mains notch (when below Nyquist), resample to
    fs_out, then a non-overlapping RMS series. Each block of window_samples
    RMS values yields one (target, target, channels) image.
    """
    rec: Recording = epoch.recording if hasattr(epoch, "recording") else epoch
    if montage is not None:
        try:
            rec = derive_montage(rec, montage)
        except MontageError as exc:
            raise FeatureError(str(exc)) from None
    x = rec.samples
    x = filter_bandpass_cheby2(x, rec.fs, band[0], band[1])
    if notch_hz < rec.fs / 2:
        x = filter_notch(x, rec.fs, notch_hz)
    if rec.fs != fs_out:
        x = resample(x, rec.fs, fs_out)
    series = rms(x, fs_out, rms_window)

    n_windows = series.shape[-1] // window_samples
    if n_windows == 0:
        raise FeatureError(
            f"RMS series of {series.shape[-1]} values is shorter than one "
            f"{window_samples}-sample window"
        )
    images = []
    for w in range(n_windows):
        block = series[:, w * window_samples : (w + 1) * window_samples]
        planes = [resize_bilinear(gasf_encode(row).matrix, target) for row in block]
        images.append(np.stack(planes, axis=-1))
    return images


def gasf_to_png(image: np.ndarray, path) -> None:
    """Write a GASF image (values in [-1, 1]) as an 8-bit PNG."""
    from PIL import Image

    arr = np.asarray(image, dtype=np.float64)
    scaled = np.round((arr + 1.0) / 2.0 * 255.0).astype(np.uint8)
    if scaled.ndim == 2:
        Image.fromarray(scaled, mode="L").save(path)
    elif scaled.ndim == 3 and scaled.shape[2] == 3:
        Image.fromarray(scaled, mode="RGB").save(path)
    else:
        raise FeatureError(f"cannot write image of shape {arr.shape} as PNG")
