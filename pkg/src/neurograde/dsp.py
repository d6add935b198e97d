"""Signal conditioning primitives shared by the feature pipelines.

Filtering, anti-aliased resampling, segmentation, clipping, Welch PSD,
analytic envelope, range-EEG, band decomposition, and windowed RMS. All
operations are pure and stateless; amplitude units are microvolts
throughout. Array inputs are processed along the last axis, so a
(channels, samples) matrix is handled in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import signal as sps

from .errors import DspError, FilterDesignError, ResampleError, SegmentError

#: Frequency bands (Hz) used for per-band feature extraction.
BANDS: tuple[tuple[float, float], ...] = ((0.5, 4.0), (4.0, 7.0), (7.0, 13.0), (13.0, 30.0))


@dataclass(frozen=True)
class FilterSpec:
    """Parameters of a conditioning filter.

    kind is "bandpass_cheby2" (low/high are stopband edges, order is the
    total pole count of the one-pass design, attenuation in dB) or "notch"
    (notch_freq with quality factor q).
    """

    kind: str
    low: float = 0.0
    high: float = 0.0
    order: int = 8
    stopband_attenuation: float = 40.0
    notch_freq: float = 50.0
    q: float = 35.0


@dataclass(frozen=True)
class SegmentGrid:
    """Tiling of an epoch into fixed windows with a constant stride."""

    window_len: float
    overlap: float
    count: int


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density in µV²/Hz."""

    freqs: np.ndarray
    power: np.ndarray
    window: str = "hamming"
    segment_overlap: float = 0.5


def _as_signal(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        raise DspError("empty signal")
    return arr


def _check_sos_stable(sos: np.ndarray) -> None:
    # a section [b0 b1 b2 1 a1 a2] is stable iff both poles are inside the
    # unit circle
    for section in sos:
        poles = np.roots(np.concatenate(([1.0], section[4:6])))
        if np.any(np.abs(poles) >= 1.0):
            raise FilterDesignError("unstable filter design")


def bandpass_sos(fs: float, low: float, high: float, order: int = 8,
                 attenuation: float = 40.0) -> np.ndarray:
    """Chebyshev type 2 bandpass as second-order sections.

    low/high are the stopband edges and order counts the poles of the
    one-pass design, so the scipy design order is order // 2.
    """
    if order < 2 or order % 2 != 0:
        raise FilterDesignError(f"bandpass order must be even and >= 2, got {order}")
    if not (0 < low < high < fs / 2):
        raise FilterDesignError(
            f"band edges must satisfy 0 < low < high < fs/2, got {low}-{high} Hz at fs {fs}"
        )
    sos = sps.cheby2(order // 2, attenuation, [low, high], btype="bandpass",
                     fs=fs, output="sos")
    _check_sos_stable(sos)
    return sos


def _padlen_sos(sos: np.ndarray) -> int:
    # mirror of the sosfiltfilt default so we can fail with a clear message
    ntaps = 2 * sos.shape[0] + 1
    return 3 * ntaps


def filter_bandpass_cheby2(x, fs: float, low: float, high: float,
                           order: int = 8, attenuation: float = 40.0) -> np.ndarray:
    """Zero-phase Chebyshev-II bandpass (forward-backward application)."""
    arr = _as_signal(x)
    sos = bandpass_sos(fs, low, high, order=order, attenuation=attenuation)
    padlen = _padlen_sos(sos)
    if arr.shape[-1] <= max(3 * order, padlen):
        raise DspError(
            f"signal too short to filter: {arr.shape[-1]} samples, need > {max(3 * order, padlen)}"
        )
    return sps.sosfiltfilt(sos, arr, axis=-1)


def filter_notch(x, fs: float, f0: float = 50.0, q: float = 35.0) -> np.ndarray:
    """Zero-phase notch; quality factor 35 keeps f0 +/- 5 Hz within 3 dB."""
    arr = _as_signal(x)
    if f0 >= fs / 2:
        raise FilterDesignError(f"notch frequency {f0} Hz at or above Nyquist ({fs / 2} Hz)")
    if f0 <= 0:
        raise FilterDesignError(f"notch frequency must be positive, got {f0}")
    b, a = sps.iirnotch(f0, q, fs=fs)
    padlen = 3 * max(len(a), len(b))
    if arr.shape[-1] <= padlen:
        raise DspError(f"signal too short to filter: {arr.shape[-1]} samples, need > {padlen}")
    return sps.filtfilt(b, a, arr, axis=-1)


def resample(x, fs_in: float, fs_out: float) -> np.ndarray:
    """Polyphase downsampling with a Kaiser low-pass at 0.9x the output Nyquist.

    Output length is round(len * fs_out / fs_in). Equal rates return the
    signal unchanged; raising the rate is refused.
    """
    arr = _as_signal(x)
    if fs_in <= 0 or fs_out <= 0:
        raise ResampleError(f"sampling rates must be positive, got {fs_in} -> {fs_out}")
    if fs_out > fs_in:
        raise ResampleError(f"refusing to upsample {fs_in} Hz -> {fs_out} Hz")
    if fs_out == fs_in:
        return arr.copy()
    ratio = Fraction(fs_out).limit_denominator(10**6) / Fraction(fs_in).limit_denominator(10**6)
    up, down = ratio.numerator, ratio.denominator
    # anti-alias FIR designed at the upsampled rate; cutoff 0.9/down of that
    # rate's Nyquist lands at 0.9x the output Nyquist
    numtaps = 20 * max(up, down) + 1
    h = sps.firwin(numtaps, 0.9 / down, window=("kaiser", 5.0))
    out = sps.resample_poly(arr, up, down, axis=-1, window=h)
    want = int(round(arr.shape[-1] * fs_out / fs_in))
    have = out.shape[-1]
    if have > want:
        out = out[..., :want]
    elif have < want:
        pad = np.repeat(out[..., -1:], want - have, axis=-1)
        out = np.concatenate([out, pad], axis=-1)
    return out


def segment_count(n_samples: int, fs: float, window_len: float, overlap: float) -> int:
    """floor((L - W) / S) + 1 with W, S in samples."""
    w = int(round(window_len * fs))
    s = int(round((window_len - overlap) * fs))
    if w > n_samples:
        raise SegmentError(f"window of {w} samples longer than signal of {n_samples}")
    return (n_samples - w) // s + 1


def segment(x, fs: float, window_len: float, overlap: float = 0.0) -> np.ndarray:
    """Tile a signal into fixed windows, dropping any trailing partial one.

    Returns a read-only (..., count, window_samples) view onto x; the stride
    is (window_len - overlap) * fs samples.
    """
    arr = _as_signal(x)
    if not (0 <= overlap < window_len):
        raise SegmentError(f"overlap must satisfy 0 <= overlap < window_len, got {overlap}/{window_len}")
    w = int(round(window_len * fs))
    s = int(round((window_len - overlap) * fs))
    if w <= 0 or s <= 0:
        raise SegmentError("window and stride must be at least one sample")
    if w > arr.shape[-1]:
        raise SegmentError(f"window of {w} samples longer than signal of {arr.shape[-1]}")
    view = np.lib.stride_tricks.sliding_window_view(arr, w, axis=-1)
    return view[..., ::s, :]


def segment_grid(n_samples: int, fs: float, window_len: float, overlap: float) -> SegmentGrid:
    return SegmentGrid(window_len=window_len, overlap=overlap,
                       count=segment_count(n_samples, fs, window_len, overlap))


def clip_and_scale(x, limit: float = 250.0, scale: float | None = None) -> np.ndarray:
    """Saturate to [-limit, +limit], then multiply by scale (default 1/limit)."""
    if limit <= 0:
        raise DspError(f"clip limit must be positive, got {limit}")
    if scale is None:
        scale = 1.0 / limit
    arr = np.asarray(x, dtype=np.float64)
    return np.clip(arr, -limit, limit) * scale


def psd_welch(x, fs: float, nperseg: int) -> PsdEstimate:
    """One-sided Welch PSD with a Hamming window and 50% segment overlap."""
    arr = _as_signal(x)
    if nperseg <= 0:
        raise DspError(f"nperseg must be positive, got {nperseg}")
    if nperseg > arr.shape[-1]:
        raise DspError(f"nperseg {nperseg} exceeds signal length {arr.shape[-1]}")
    freqs, power = sps.welch(arr, fs=fs, window="hamming", nperseg=nperseg,
                             noverlap=nperseg // 2, detrend="constant", axis=-1)
    return PsdEstimate(freqs=freqs, power=power)


def band_decompose(x, fs: float, bands=BANDS, order: int = 8) -> list[np.ndarray]:
    """Bandpass the signal into each analysis band."""
    if fs < 64:
        raise FilterDesignError(f"need fs >= 64 Hz to cover the top band, got {fs}")
    return [filter_bandpass_cheby2(x, fs, lo, hi, order=order) for lo, hi in bands]


def envelope(x) -> np.ndarray:
    """Instantaneous amplitude: magnitude of the analytic signal."""
    arr = _as_signal(x)
    if arr.shape[-1] < 16:
        raise DspError(f"need at least 16 samples for an envelope, got {arr.shape[-1]}")
    return np.abs(sps.hilbert(arr, axis=-1))


def _window_matrix(arr: np.ndarray, w: int) -> np.ndarray:
    n = arr.shape[-1]
    m = n // w
    return arr[..., : m * w].reshape(arr.shape[:-1] + (m, w))


def reeg(x, fs: float, window: float = 2.0) -> np.ndarray:
    """Range EEG: peak-to-peak amplitude per non-overlapping window."""
    arr = _as_signal(x)
    w = int(round(window * fs))
    if w <= 0 or w > arr.shape[-1]:
        raise DspError(f"rEEG window of {w} samples invalid for signal of {arr.shape[-1]}")
    mat = _window_matrix(arr, w)
    return mat.max(axis=-1) - mat.min(axis=-1)


def rms(x, fs: float, window: float) -> np.ndarray:
    """Root-mean-square amplitude per non-overlapping window."""
    arr = _as_signal(x)
    w = int(round(window * fs))
    if w <= 0 or w > arr.shape[-1]:
        raise DspError(f"RMS window of {w} samples invalid for signal of {arr.shape[-1]}")
    mat = _window_matrix(arr, w)
    return np.sqrt(np.mean(mat * mat, axis=-1))


def bandpass_response_db(fs: float, low: float, high: float, freq: float,
                         order: int = 8, attenuation: float = 40.0) -> float:
    """Two-pass magnitude response of the bandpass at one frequency, in dB."""
    sos = bandpass_sos(fs, low, high, order=order, attenuation=attenuation)
    _, h = sps.sosfreqz(sos, worN=[freq], fs=fs)
    mag = float(np.abs(h[0])) ** 2  # forward-backward squares the magnitude
    if mag <= 0:
        return -math.inf
    return 20.0 * math.log10(mag)
