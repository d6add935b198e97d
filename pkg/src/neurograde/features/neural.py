"""The per-epoch qEEG feature vector and its per-window building blocks.

The 102-entry vector summarizes each feature as the median across 64 s
analysis windows (50% overlap) and across channels. Amplitude, rEEG, and
banded spectral/connectivity features are computed per frequency band
([0.5-4, 4-7, 7-13, 13-30] Hz); spectral edge frequency and fractal
dimension come from the broadband signal; four inter-burst-interval
features come from whole-epoch burst detection.

Scalar functions here are the per-window reference definitions; the
extractor computes the same quantities vectorized over all windows and
channels at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps
from scipy import stats as spstats

from ..dsp import BANDS, PsdEstimate, filter_bandpass_cheby2, resample
from ..dsp import reeg as reeg_series
from ..eeg_io import MONTAGES, GradedEpoch, MontageSpec, Recording, derive_montage
from ..errors import FeatureError, MontageError, SpectralError
from .bursts import detect_bursts, ibi_features
from .copula import theta_of_tau

AMPLITUDE_NAMES = ("total_power", "sd", "skewness", "kurtosis", "envelope_mean", "envelope_sd")
REEG_NAMES = ("mean", "median", "lower_margin", "upper_margin", "width", "sd", "cv", "asymmetry")
SPECTRAL_BAND_NAMES = ("power", "relative_power", "flatness", "entropy", "difference")
CONNECTIVITY_NAMES = (
    "bsi",
    "envelope_correlation",
    "coherence_mean",
    "coherence_max",
    "coherence_freq_max",
)
IBI_NAMES = ("p95", "median", "burst_percentage", "num_bursts")

#: The full feature census: 24 amplitude + 32 rEEG + 20 banded spectral
#: + 20 connectivity + 2 broadband spectral + 4 IBI = 102 names.
NEURAL_FEATURE_NAMES: tuple[str, ...] = (
    tuple(f"amplitude.{n}.band{b}" for n in AMPLITUDE_NAMES for b in range(1, 5))
    + tuple(f"reeg.{n}.band{b}" for n in REEG_NAMES for b in range(1, 5))
    + tuple(f"spectral.{n}.band{b}" for n in SPECTRAL_BAND_NAMES for b in range(1, 5))
    + tuple(f"connectivity.{n}.band{b}" for n in CONNECTIVITY_NAMES for b in range(1, 5))
    + ("spectral.edge_frequency", "spectral.fractal_dimension")
    + tuple(f"ibi.{n}" for n in IBI_NAMES)
)
assert len(NEURAL_FEATURE_NAMES) == 102

#: Features of the SVM grader, named for the default 8-channel montage:
#: 1 SVD + 4 copula pairs + 4x4 banded spectral/rEEG summaries = 25 values.
GRADER_FEATURE_NAMES: tuple[str, ...] = (
    ("svd.max_singular",)
    + tuple(f"copula.theta.pair{k}" for k in range(1, 5))
    + tuple(f"spectral.power.band{b}" for b in range(1, 5))
    + tuple(f"spectral.max_power.band{b}" for b in range(1, 5))
    + tuple(f"spectral.entropy.band{b}" for b in range(1, 5))
    + tuple(f"reeg.p95_min.band{b}" for b in range(1, 5))
    + tuple(f"reeg.range_max.band{b}" for b in range(1, 5))
)


@dataclass(frozen=True)
class NeuralConfig:
    """Analysis grid and conditioning parameters for feature extraction."""

    fs: float = 64.0
    window_s: float = 64.0
    overlap_s: float = 32.0
    bands: tuple[tuple[float, float], ...] = BANDS
    broadband: tuple[float, float] = (0.5, 30.0)
    filter_order: int = 8
    reeg_window: float = 2.0
    psd_nperseg: int = 512
    higuchi_kmax: int = 8
    edge_fraction: float = 0.95
    edge_low: float = 0.5
    max_undefined_fraction: float = 0.25
    burst_threshold_factor: float = 1.5
    burst_floor: float = 5.0
    burst_ceiling: float = 25.0
    burst_min_s: float = 1.0
    burst_merge_gap_s: float = 0.5
    burst_smooth_s: float = 1.0


DEFAULT_CONFIG = NeuralConfig()


@dataclass(frozen=True)
class FeatureVector:
    """Named per-epoch features; NaN marks an undefined (flagged) entry."""

    values: dict[str, float]
    epoch_id: str = ""
    montage: str | None = None

    def as_array(self, names: tuple[str, ...] = NEURAL_FEATURE_NAMES) -> np.ndarray:
        return np.array([self.values[n] for n in names], dtype=np.float64)


def _nanmedian(a, axis=None) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmedian(a, axis=axis)


def _sliding(a: np.ndarray, width: int, step: int) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view(a, width, axis=-1)
    return view[..., ::step, :]


def _moments(win: np.ndarray):
    """Population mean/SD plus skewness and excess kurtosis along the last axis."""
    mean = win.mean(axis=-1)
    d = win - mean[..., None]
    m2 = (d * d).mean(axis=-1)
    sd = np.sqrt(m2)
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = (d**3).mean(axis=-1) / m2**1.5
        kurt = (d**4).mean(axis=-1) / (m2 * m2) - 3.0
    return mean, sd, skew, kurt


# --- scalar per-window reference operations -----------------------------------


def amplitude_features(x, fs: float, min_window_s: float = 64.0) -> dict[str, float]:
    """Six amplitude statistics of one band-limited analysis window."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise FeatureError(f"need a 1-D window, got shape {arr.shape}")
    if arr.size < min_window_s * fs:
        raise FeatureError(
            f"window of {arr.size / fs:.1f}s shorter than {min_window_s}s"
        )
    _, sd, skew, kurt = _moments(arr[None])
    env = np.abs(sps.hilbert(arr))
    return {
        "total_power": float(np.mean(arr * arr)),
        "sd": float(sd[0]),
        "skewness": float(skew[0]),
        "kurtosis": float(kurt[0]),
        "envelope_mean": float(env.mean()),
        "envelope_sd": float(env.std()),
    }


def _reeg_stats(r: np.ndarray):
    """The eight rEEG summary statistics along the last axis."""
    mean = r.mean(axis=-1)
    med = np.median(r, axis=-1)
    lower = np.percentile(r, 5, axis=-1)
    upper = np.percentile(r, 95, axis=-1)
    width = upper - lower
    sd = r.std(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cv = np.where(mean != 0, sd / mean, np.nan)
        asymmetry = np.where(width != 0, ((upper - med) - (med - lower)) / width, np.nan)
    return {
        "mean": mean,
        "median": med,
        "lower_margin": lower,
        "upper_margin": upper,
        "width": width,
        "sd": sd,
        "cv": cv,
        "asymmetry": asymmetry,
    }


def reeg_features(x, fs: float, reeg_window: float = 2.0) -> dict[str, float]:
    """Eight statistics of the peak-to-peak (rEEG) series of one window."""
    r = reeg_series(np.asarray(x, dtype=np.float64), fs, reeg_window)
    if r.shape[-1] < 2:
        raise FeatureError(f"need at least 2 rEEG windows, got {r.shape[-1]}")
    return {k: float(v) for k, v in _reeg_stats(r).items()}


def short_time_spectra(x, fs: float, nperseg: int):
    """Consecutive 50%-overlapping Hamming-window PSD estimates.

    Returns (freqs, S) with S shaped (..., freqs, segments); the mean of S
    over segments equals the Welch estimate with the same parameters.
    """
    freqs, _, S = sps.spectrogram(
        x, fs=fs, window="hamming", nperseg=nperseg, noverlap=nperseg // 2,
        detrend="constant", axis=-1,
    )
    return freqs, S


def spectral_edge_frequency(psd: PsdEstimate, fraction: float = 0.95,
                            f_low: float = 0.5) -> float:
    """Frequency below which `fraction` of the power above f_low lies."""
    sel = psd.freqs >= f_low
    p = psd.power[..., sel]
    total = p.sum(axis=-1)
    if np.any(total <= 0):
        raise SpectralError("zero total power")
    cum = np.cumsum(p, axis=-1)
    idx = np.argmax(cum >= fraction * total, axis=-1)
    return float(psd.freqs[sel][idx])


def fractal_dimension(x, k_max: int = 8) -> float:
    """Curve-length (Higuchi) fractal dimension of one window."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size <= k_max:
        raise FeatureError(f"need a 1-D window longer than k_max={k_max}")
    return float(_higuchi_batch(arr[None], k_max)[0])


def _higuchi_batch(win: np.ndarray, k_max: int) -> np.ndarray:
    n = win.shape[-1]
    log_l = []
    for k in range(1, k_max + 1):
        lengths = []
        for m in range(k):
            seq = win[..., m::k]
            q = seq.shape[-1] - 1
            if q < 1:
                continue
            total = np.abs(np.diff(seq, axis=-1)).sum(axis=-1)
            lengths.append(total * (n - 1) / (q * k * k))
        with np.errstate(divide="ignore"):
            log_l.append(np.log(np.mean(lengths, axis=0)))
    logs = np.stack(log_l, axis=-1)
    ticks = np.log(1.0 / np.arange(1, k_max + 1))
    centered = ticks - ticks.mean()
    with np.errstate(invalid="ignore"):
        slope = ((logs - logs.mean(axis=-1, keepdims=True)) * centered).sum(axis=-1)
        slope = slope / (centered * centered).sum()
    return np.where(np.all(np.isfinite(logs), axis=-1), slope, np.nan)


def spectral_features(
    psd: PsdEstimate,
    band: tuple[float, float],
    signal=None,
    fs: float | None = None,
    nperseg: int = 512,
    total_band: tuple[float, float] = (0.5, 30.0),
    k_max: int = 8,
    edge_fraction: float = 0.95,
) -> dict[str, float]:
    """Spectral summary of one window restricted to a band.

    Five values derive from the PSD alone; spectral difference needs the
    window samples (consecutive short-time spectra) and fractal dimension
    the window samples too, so both are NaN unless `signal` (with `fs`) is
    given. Band edges are half-open [low, high).
    """
    freqs = psd.freqs
    df = float(freqs[1] - freqs[0])
    mask = (freqs >= band[0]) & (freqs < band[1])
    if not np.any(mask):
        raise SpectralError(f"band {band} outside PSD support")
    total_mask = (freqs >= total_band[0]) & (freqs < total_band[1])
    total_power = float(psd.power[..., total_mask].sum()) * df
    if total_power <= 0:
        raise SpectralError("zero total power")
    p = np.asarray(psd.power[..., mask], dtype=np.float64)
    power = float(p.sum()) * df

    with np.errstate(divide="ignore", invalid="ignore"):
        flatness = float(np.exp(np.mean(np.log(p))) / p.mean()) if p.mean() > 0 else math.nan
    if p.sum() > 0:
        pn = p / p.sum()
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pn > 0, pn * np.log(pn), 0.0)
        entropy = float(-terms.sum() / math.log(pn.size)) if pn.size > 1 else 0.0
    else:
        entropy = math.nan

    difference = math.nan
    fractal = math.nan
    if signal is not None:
        if fs is None:
            raise FeatureError("fs is required when signal is given")
        arr = np.asarray(signal, dtype=np.float64)
        sfreqs, spectra = short_time_spectra(arr, fs, min(nperseg, arr.shape[-1]))
        smask = (sfreqs >= band[0]) & (sfreqs < band[1])
        if spectra.shape[-1] >= 2 and power > 0:
            delta = np.diff(spectra[..., smask, :], axis=-1)
            difference = float(np.mean(delta * delta) / power)
        fractal = fractal_dimension(arr, k_max=k_max)

    return {
        "power": power,
        "relative_power": power / total_power,
        "flatness": flatness,
        "entropy": entropy,
        "difference": difference,
        "edge_frequency": spectral_edge_frequency(psd, edge_fraction, total_band[0]),
        "fractal_dimension": fractal,
    }


def _coherence_stats(cxy: np.ndarray, band_freqs: np.ndarray):
    """Mean/max/argmax-frequency of coherence along the last (bin) axis."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(cxy, axis=-1)
        filled = np.where(np.isnan(cxy), -np.inf, cxy)
        peak = filled.max(axis=-1)
        arg = filled.argmax(axis=-1)
    cmax = np.where(np.isfinite(peak), peak, np.nan)
    fmax = np.where(np.isfinite(peak), band_freqs[arg], np.nan)
    return mean, cmax, fmax


def connectivity_features(
    left,
    right,
    fs: float,
    band: tuple[float, float] | None = None,
    nperseg: int = 512,
) -> dict[str, float]:
    """Symmetry and coupling of hemisphere-paired windows (median over pairs).

    left/right are one window each (1-D) or aligned stacks of paired
    windows (2-D, pair-major).
    """
    l_arr = np.atleast_2d(np.asarray(left, dtype=np.float64))
    r_arr = np.atleast_2d(np.asarray(right, dtype=np.float64))
    if l_arr.shape != r_arr.shape:
        raise FeatureError(
            f"unpaired channel sets: {l_arr.shape} left vs {r_arr.shape} right"
        )
    n = l_arr.shape[-1]
    nper = min(nperseg, n)
    freqs, pl = sps.welch(l_arr, fs=fs, window="hamming", nperseg=nper,
                          noverlap=nper // 2, detrend="constant", axis=-1)
    _, pr = sps.welch(r_arr, fs=fs, window="hamming", nperseg=nper,
                      noverlap=nper // 2, detrend="constant", axis=-1)
    _, pxy = sps.csd(l_arr, r_arr, fs=fs, window="hamming", nperseg=nper,
                     noverlap=nper // 2, detrend="constant", axis=-1)
    if band is None:
        band = (0.5, fs / 2)
    mask = (freqs >= band[0]) & (freqs < band[1])
    if not np.any(mask):
        raise FeatureError(f"band {band} outside coherence support")

    with np.errstate(divide="ignore", invalid="ignore"):
        bsi_bins = np.abs((pl - pr) / (pl + pr))[..., mask]
        cxy = (np.abs(pxy) ** 2 / (pl * pr))[..., mask]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        bsi = np.nanmean(bsi_bins, axis=-1)
    coh_mean, coh_max, coh_fmax = _coherence_stats(cxy, freqs[mask])

    env_l = np.abs(sps.hilbert(l_arr, axis=-1))
    env_r = np.abs(sps.hilbert(r_arr, axis=-1))
    corr = _pearson_last_axis(env_l, env_r)

    return {
        "bsi": float(_nanmedian(bsi)),
        "envelope_correlation": float(_nanmedian(corr)),
        "coherence_mean": float(_nanmedian(coh_mean)),
        "coherence_max": float(_nanmedian(coh_max)),
        "coherence_freq_max": float(_nanmedian(coh_fmax)),
    }


def _pearson_last_axis(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    da = a - a.mean(axis=-1, keepdims=True)
    db = b - b.mean(axis=-1, keepdims=True)
    num = (da * db).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / np.sqrt((da * da).sum(axis=-1) * (db * db).sum(axis=-1))


def svd_max_singular(x, fs: float, window_s: float = 64.0,
                     return_series: bool = False):
    """Largest singular value of channel-by-sample blocks, reduced by max.

    The signal is tiled into non-overlapping windows; each window's
    channels-by-samples matrix contributes its top singular value.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise FeatureError(f"need a (channels >= 2, samples) matrix, got shape {arr.shape}")
    c, n = arr.shape
    w = int(round(window_s * fs))
    if w < c:
        raise FeatureError(f"window of {w} samples has fewer samples than {c} channels")
    q = n // w
    if q < 1:
        raise FeatureError(f"signal of {n} samples shorter than one {w}-sample window")
    blocks = arr[:, : q * w].reshape(c, q, w)
    gram = np.einsum("cqw,dqw->qcd", blocks, blocks)
    eigvals = np.linalg.eigvalsh(gram)[:, -1]
    series = np.sqrt(np.maximum(eigvals, 0.0))
    if return_series:
        return series
    return float(series.max())


# --- hemisphere pairing ---------------------------------------------------------


def _mirror_electrode(name: str) -> str:
    if name and name[-1].isdigit():
        digit = int(name[-1])
        flipped = digit + 1 if digit % 2 == 1 else digit - 1
        return name[:-1] + str(flipped)
    return name


def _mirror_label(label: str) -> str:
    return "-".join(_mirror_electrode(part) for part in label.split("-"))


def hemisphere_pairs(labels) -> list[tuple[int, int]]:
    """Pair channels with their contralateral counterparts.

    Pairing is by label mirroring (odd/even electrode numbers swapped,
    polarity-reversed match accepted); if any channel lacks a mirror the
    pairing falls back to consecutive positions (0,1), (2,3), ...
    """
    labels = list(labels)
    if len(labels) % 2 != 0:
        raise FeatureError(f"cannot pair an odd number of channels ({len(labels)})")
    unused = set(range(len(labels)))
    pairs: list[tuple[int, int]] = []
    for i, label in enumerate(labels):
        if i not in unused:
            continue
        mirror = _mirror_label(label)
        reversed_mirror = "-".join(reversed(mirror.split("-")))
        j = None
        for candidate in (mirror, reversed_mirror):
            if candidate in labels:
                idx = labels.index(candidate)
                if idx != i and idx in unused:
                    j = idx
                    break
        if j is None:
            break
        unused -= {i, j}
        pairs.append((min(i, j), max(i, j)))
    if not unused:
        return sorted(pairs)
    return [(2 * k, 2 * k + 1) for k in range(len(labels) // 2)]


# --- the vectorized extractor ---------------------------------------------------


def _resolve_montage(montage) -> tuple[MontageSpec | None, str | None]:
    if montage is None:
        return None, None
    if isinstance(montage, str):
        if montage not in MONTAGES:
            raise MontageError(f"unknown montage {montage!r}, have {sorted(MONTAGES)}")
        return MONTAGES[montage], montage
    return montage, "custom"


def _conditioned(rec: Recording, config: NeuralConfig) -> tuple[np.ndarray, float]:
    """Broadband-filter at the native rate, then bring to the analysis rate."""
    if rec.fs < config.fs:
        raise FeatureError(
            f"recording at {rec.fs} Hz below the {config.fs} Hz analysis rate"
        )
    x = filter_bandpass_cheby2(
        rec.samples, rec.fs, config.broadband[0], config.broadband[1],
        order=config.filter_order,
    )
    if rec.fs > config.fs:
        x = resample(x, rec.fs, config.fs)
    return x, config.fs


def _prepare(epoch, montage, config):
    if isinstance(epoch, GradedEpoch):
        rec, epoch_id = epoch.recording, epoch.epoch_id
    else:
        rec, epoch_id = epoch, ""
    spec, montage_name = _resolve_montage(montage)
    if spec is not None:
        rec = derive_montage(rec, spec)
    x, fs = _conditioned(rec, config)
    w = int(round(config.window_s * fs))
    s = int(round((config.window_s - config.overlap_s) * fs))
    if x.shape[-1] < w:
        raise FeatureError(
            f"epoch of {x.shape[-1] / fs:.0f}s shorter than one {config.window_s:.0f}s window"
        )
    return x, fs, rec.channel_labels, epoch_id, montage_name, w, s


def extract_neural_vector(
    epoch,
    montage=None,
    config: NeuralConfig = DEFAULT_CONFIG,
) -> FeatureVector:
    """Compute the 102-entry feature vector for one epoch.

    `epoch` is a GradedEpoch or Recording; `montage` is a montage name, a
    MontageSpec, or None when the channels are already derived. Entries
    whose inputs are degenerate (for example IBI percentiles without
    bursts) are NaN; more than 25% undefined entries raises FeatureError.
    """
    x, fs, labels, epoch_id, montage_name, w, s = _prepare(epoch, montage, config)
    c = x.shape[0]
    win_broad = _sliding(x, w, s)
    m = win_broad.shape[-2]
    values: dict[str, float] = {}

    # broadband spectral machinery, band-sliced below
    nper = min(config.psd_nperseg, w)
    freqs, pxx = sps.welch(win_broad, fs=fs, window="hamming", nperseg=nper,
                           noverlap=nper // 2, detrend="constant", axis=-1)
    sfreqs, sxx = short_time_spectra(win_broad, fs, nper)
    df = float(freqs[1] - freqs[0])
    total_mask = (freqs >= config.broadband[0]) & (freqs < config.broadband[1])
    total_power = pxx[..., total_mask].sum(axis=-1) * df  # (c, m)

    pairs = hemisphere_pairs(labels)
    left = [i for i, _ in pairs]
    right = [j for _, j in pairs]
    _, pxy = sps.csd(win_broad[left], win_broad[right], fs=fs, window="hamming",
                     nperseg=nper, noverlap=nper // 2, detrend="constant", axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cxy_all = np.abs(pxy) ** 2 / (pxx[left] * pxx[right])
        bsi_all = np.abs((pxx[left] - pxx[right]) / (pxx[left] + pxx[right]))

    reeg_w = int(round(config.reeg_window * fs))
    n_reeg = w // reeg_w

    for b, (lo, hi) in enumerate(config.bands, start=1):
        band_sig = filter_bandpass_cheby2(x, fs, lo, hi, order=config.filter_order)
        win = _sliding(band_sig, w, s)
        env = np.abs(sps.hilbert(win, axis=-1))

        _, sd, skew, kurt = _moments(win)
        amplitude = {
            "total_power": (win * win).mean(axis=-1),
            "sd": sd,
            "skewness": skew,
            "kurtosis": kurt,
            "envelope_mean": env.mean(axis=-1),
            "envelope_sd": env.std(axis=-1),
        }
        for name, grid in amplitude.items():
            values[f"amplitude.{name}.band{b}"] = float(_nanmedian(grid))

        rmat = win[..., : n_reeg * reeg_w].reshape(c, m, n_reeg, reeg_w)
        r = rmat.max(axis=-1) - rmat.min(axis=-1)
        for name, grid in _reeg_stats(r).items():
            values[f"reeg.{name}.band{b}"] = float(_nanmedian(grid))

        mask = (freqs >= lo) & (freqs < hi)
        p = pxx[..., mask]
        power = p.sum(axis=-1) * df
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = power / total_power
            flat = np.exp(np.log(p).mean(axis=-1)) / p.mean(axis=-1)
            pn = p / p.sum(axis=-1, keepdims=True)
            terms = np.where(pn > 0, pn * np.log(pn), 0.0)
            entropy = -terms.sum(axis=-1) / math.log(mask.sum())
            entropy = np.where(np.isfinite(pn).all(axis=-1), entropy, np.nan)
            delta = np.diff(sxx[..., mask, :], axis=-1)
            diff = (delta * delta).mean(axis=(-2, -1)) / power
        values[f"spectral.power.band{b}"] = float(_nanmedian(power))
        values[f"spectral.relative_power.band{b}"] = float(_nanmedian(rel))
        values[f"spectral.flatness.band{b}"] = float(_nanmedian(flat))
        values[f"spectral.entropy.band{b}"] = float(_nanmedian(entropy))
        values[f"spectral.difference.band{b}"] = float(_nanmedian(diff))

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            bsi = np.nanmean(bsi_all[..., mask], axis=-1)
        coh_mean, coh_max, coh_fmax = _coherence_stats(cxy_all[..., mask], freqs[mask])
        corr = _pearson_last_axis(env[left], env[right])
        connectivity = {
            "bsi": bsi,
            "envelope_correlation": corr,
            "coherence_mean": coh_mean,
            "coherence_max": coh_max,
            "coherence_freq_max": coh_fmax,
        }
        for name, grid in connectivity.items():
            values[f"connectivity.{name}.band{b}"] = float(_nanmedian(grid))

    # broadband whole-window features
    sel = freqs >= config.edge_low
    p_sel = pxx[..., sel]
    totals = p_sel.sum(axis=-1)
    cum = np.cumsum(p_sel, axis=-1)
    idx = np.argmax(cum >= config.edge_fraction * totals[..., None], axis=-1)
    edges = np.where(totals > 0, freqs[sel][idx], np.nan)
    values["spectral.edge_frequency"] = float(_nanmedian(edges))
    values["spectral.fractal_dimension"] = float(
        _nanmedian(_higuchi_batch(win_broad, config.higuchi_kmax))
    )

    epoch_len = x.shape[-1] / fs
    per_channel = []
    for ch in range(c):
        ann = detect_bursts(
            x[ch], fs,
            threshold_factor=config.burst_threshold_factor,
            floor=config.burst_floor,
            ceiling=config.burst_ceiling,
            min_burst=config.burst_min_s,
            merge_gap=config.burst_merge_gap_s,
            smooth=config.burst_smooth_s,
        )
        per_channel.append(ibi_features(ann, epoch_len))
    for name in IBI_NAMES:
        values[f"ibi.{name}"] = float(_nanmedian([row[name] for row in per_channel]))

    ordered = {name: values[name] for name in NEURAL_FEATURE_NAMES}
    n_undefined = sum(1 for v in ordered.values() if math.isnan(v))
    if n_undefined > config.max_undefined_fraction * len(ordered):
        raise FeatureError(
            f"{n_undefined} of {len(ordered)} features undefined "
            f"(limit {config.max_undefined_fraction:.0%})"
        )
    return FeatureVector(values=ordered, epoch_id=epoch_id, montage=montage_name)


def grader_features(
    epoch,
    montage=None,
    config: NeuralConfig = DEFAULT_CONFIG,
) -> FeatureVector:
    """The SVM grader's feature family: SVD, copula, and spectral/rEEG summaries.

    Copula dependence uses non-overlapping analysis windows: Kendall tau per
    window, median across windows, one inversion per channel pair.
    """
    x, fs, labels, epoch_id, montage_name, w, s = _prepare(epoch, montage, config)
    c = x.shape[0]
    values: dict[str, float] = {}

    values["svd.max_singular"] = svd_max_singular(x, fs, config.window_s)

    pairs = hemisphere_pairs(labels)
    q = x.shape[-1] // w
    blocks = x[:, : q * w].reshape(c, q, w)
    u = spstats.rankdata(blocks, method="average", axis=-1) / (w + 1)
    for k, (i, j) in enumerate(pairs, start=1):
        taus = []
        for block in range(q):
            tau = spstats.kendalltau(u[i, block], u[j, block]).statistic
            if not math.isnan(tau):
                taus.append(tau)
        if taus:
            theta = theta_of_tau(float(np.median(taus)))
            values[f"copula.theta.pair{k}"] = 0.0 if abs(theta) < 1e-4 else theta
        else:
            values[f"copula.theta.pair{k}"] = math.nan

    win_broad = _sliding(x, w, s)
    nper = min(config.psd_nperseg, w)
    freqs, pxx = sps.welch(win_broad, fs=fs, window="hamming", nperseg=nper,
                           noverlap=nper // 2, detrend="constant", axis=-1)
    df = float(freqs[1] - freqs[0])
    for b, (lo, hi) in enumerate(config.bands, start=1):
        mask = (freqs >= lo) & (freqs < hi)
        p = pxx[..., mask]
        power = p.sum(axis=-1) * df  # (c, m)
        values[f"spectral.power.band{b}"] = float(_nanmedian(power))
        values[f"spectral.max_power.band{b}"] = float(np.median(power.max(axis=-1)))
        with np.errstate(divide="ignore", invalid="ignore"):
            pn = p / p.sum(axis=-1, keepdims=True)
            terms = np.where(pn > 0, pn * np.log(pn), 0.0)
            entropy = -terms.sum(axis=-1) / math.log(mask.sum())
            entropy = np.where(np.isfinite(pn).all(axis=-1), entropy, np.nan)
        values[f"spectral.entropy.band{b}"] = float(_nanmedian(entropy))

        band_sig = filter_bandpass_cheby2(x, fs, lo, hi, order=config.filter_order)
        r = reeg_series(band_sig, fs, config.reeg_window)  # (c, windows)
        p5 = np.percentile(r, 5, axis=-1)
        p95 = np.percentile(r, 95, axis=-1)
        values[f"reeg.p95_min.band{b}"] = float(p95.min())
        values[f"reeg.range_max.band{b}"] = float((p95 - p5).max())

    return FeatureVector(values=values, epoch_id=epoch_id, montage=montage_name)
