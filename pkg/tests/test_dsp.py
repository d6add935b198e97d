"""Signal-conditioning behavior against analytic and FFT oracles."""

import math

import numpy as np
import pytest

from neurograde.dsp import (
    BANDS,
    band_decompose,
    bandpass_response_db,
    clip_and_scale,
    envelope,
    filter_bandpass_cheby2,
    filter_notch,
    psd_welch,
    reeg,
    resample,
    rms,
    segment,
    segment_count,
)
from neurograde.errors import DspError, FilterDesignError, ResampleError, SegmentError


def sinusoid(freq, fs, duration, amplitude=1.0, phase=0.0):
    t = np.arange(int(duration * fs)) / fs
    return amplitude * np.sin(2 * math.pi * freq * t + phase)


def projected_amplitude(x, fs, freq):
    """Amplitude of the component at freq, measured on the middle half."""
    n = len(x)
    mid = x[n // 4 : 3 * n // 4]
    t = np.arange(n // 4, n // 4 + len(mid)) / fs
    z = mid @ np.exp(-2j * math.pi * freq * t)
    return 2.0 * abs(z) / len(mid)


class TestBandpass:
    def test_dc_rejected(self):
        x = np.full(2560, 10.0)
        y = filter_bandpass_cheby2(x, 256, 0.5, 32.0)
        mid = y[len(y) // 4 : -len(y) // 4]
        assert np.max(np.abs(mid)) < 0.1

    def test_passband_sinusoid_preserved(self):
        x = sinusoid(10, 256, 20)
        y = filter_bandpass_cheby2(x, 256, 0.5, 32.0)
        assert projected_amplitude(y, 256, 10) == pytest.approx(1.0, rel=0.05)

    def test_stopband_sinusoid_attenuated_40db(self):
        x = sinusoid(60, 256, 20)
        y = filter_bandpass_cheby2(x, 256, 0.5, 32.0)
        residual = projected_amplitude(y, 256, 60)
        assert residual < 10 ** (-40 / 20.0)
        # magnitude-response oracle agrees the design meets 40 dB there
        assert bandpass_response_db(256, 0.5, 32.0, 60.0) < -40.0

    def test_zero_phase_no_lag(self):
        # a symmetric pulse stays centered after forward-backward filtering
        x = np.zeros(4096)
        x[2048] = 1.0
        y = filter_bandpass_cheby2(x, 256, 0.5, 32.0)
        assert abs(int(np.argmax(np.abs(y))) - 2048) <= 1

    def test_linearity(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(2000)
        y = rng.standard_normal(2000)
        a, b = 2.5, -1.25
        lhs = filter_bandpass_cheby2(a * x + b * y, 256, 0.5, 32.0)
        rhs = a * filter_bandpass_cheby2(x, 256, 0.5, 32.0) + b * filter_bandpass_cheby2(
            y, 256, 0.5, 32.0
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.max(np.abs(lhs)))

    def test_band_outside_nyquist(self):
        with pytest.raises(FilterDesignError):
            filter_bandpass_cheby2(np.ones(1000), 64, 0.5, 40.0)
        with pytest.raises(FilterDesignError):
            filter_bandpass_cheby2(np.ones(1000), 64, 5.0, 2.0)
        with pytest.raises(FilterDesignError):
            filter_bandpass_cheby2(np.ones(1000), 64, 0.0, 30.0)

    def test_odd_order_rejected(self):
        with pytest.raises(FilterDesignError):
            filter_bandpass_cheby2(np.ones(1000), 256, 0.5, 32.0, order=7)

    def test_short_signal_rejected(self):
        with pytest.raises(DspError):
            filter_bandpass_cheby2(np.ones(10), 256, 0.5, 32.0)

    def test_multichannel_rows_match_single(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((3, 1500))
        y = filter_bandpass_cheby2(x, 256, 0.5, 32.0)
        for k in range(3):
            np.testing.assert_allclose(
                y[k], filter_bandpass_cheby2(x[k], 256, 0.5, 32.0), atol=1e-12
            )


class TestNotch:
    def test_50hz_suppressed(self):
        x = sinusoid(50, 256, 20)
        y = filter_notch(x, 256, 50.0)
        assert projected_amplitude(y, 256, 50) < 0.032

    def test_neighbor_frequencies_kept(self):
        for f in (45.0, 55.0):
            x = sinusoid(f, 256, 20)
            y = filter_notch(x, 256, 50.0)
            amp = projected_amplitude(y, 256, f)
            assert 20 * math.log10(max(amp, 1e-12)) > -3.0

    def test_10hz_within_3_percent(self):
        x = sinusoid(10, 256, 20)
        y = filter_notch(x, 256, 50.0)
        assert projected_amplitude(y, 256, 10) == pytest.approx(1.0, rel=0.03)

    def test_zero_signal(self):
        y = filter_notch(np.zeros(1000), 256, 50.0)
        assert np.all(y == 0)

    def test_notch_at_or_above_nyquist(self):
        with pytest.raises(FilterDesignError):
            filter_notch(np.ones(1000), 64, 50.0)
        with pytest.raises(FilterDesignError):
            filter_notch(np.ones(1000), 100, 50.0)


class TestResample:
    def test_length_formula(self):
        x = np.zeros(921600)
        assert resample(x, 256, 64).shape[-1] == 230400
        x = np.zeros(1001)
        assert resample(x, 250, 64).shape[-1] == round(1001 * 64 / 250)

    def test_tone_preserved(self):
        x = sinusoid(4, 256, 30)
        y = resample(x, 256, 64)
        spec = np.abs(np.fft.rfft(y))
        freqs = np.fft.rfftfreq(len(y), 1 / 64)
        assert freqs[int(np.argmax(spec))] == pytest.approx(4.0, abs=0.05)
        assert projected_amplitude(y, 64, 4) == pytest.approx(1.0, rel=0.02)

    def test_above_output_nyquist_removed(self):
        x = sinusoid(40, 256, 30)
        y = resample(x, 256, 64)
        mid = y[len(y) // 4 : -len(y) // 4]
        assert np.max(np.abs(mid)) < 0.01

    def test_constant_preserved(self):
        x = np.full(2560, 7.5)
        y = resample(x, 256, 64)
        mid = y[len(y) // 4 : -len(y) // 4]
        np.testing.assert_allclose(mid, 7.5, rtol=1e-3)

    def test_equal_rates_identity(self):
        x = np.random.default_rng(2).standard_normal(1000)
        y = resample(x, 64, 64)
        np.testing.assert_array_equal(y, x)
        z = resample(resample(x, 64, 64), 64, 64)
        np.testing.assert_array_equal(z, x)

    def test_upsample_refused(self):
        with pytest.raises(ResampleError):
            resample(np.ones(100), 64, 256)

    def test_noninteger_ratio(self):
        x = sinusoid(4, 250, 30)
        y = resample(x, 250, 64)
        assert len(y) == round(len(x) * 64 / 250)
        assert projected_amplitude(y, 64, 4) == pytest.approx(1.0, rel=0.02)


class TestSegment:
    def test_one_hour_minute_windows(self):
        assert segment_count(3600 * 64, 64, 60, 30) == 119
        x = np.zeros(3600 * 64)
        assert segment(x, 64, 60, 30).shape == (119, 3840)

    def test_64s_half_overlap_grid(self):
        assert segment_count(3600 * 64, 64, 64, 32) == 111

    def test_no_overlap(self):
        assert segment(np.zeros(120 * 64), 64, 60, 0).shape[0] == 2

    def test_trailing_partial_dropped(self):
        segs = segment(np.arange(1000.0), 1, 300, 0)
        assert segs.shape == (3, 300)
        np.testing.assert_array_equal(segs[-1], np.arange(600.0, 900.0))

    def test_stride_content(self):
        segs = segment(np.arange(100.0), 1, 10, 5)
        np.testing.assert_array_equal(segs[1], np.arange(5.0, 15.0))

    def test_count_formula_random(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(50, 5000))
            w = int(rng.integers(1, 40))
            s = int(rng.integers(1, w + 1))
            if w > n:
                continue
            count = segment(np.zeros(n), 1, w, w - s).shape[0]
            assert count == (n - w) // s + 1

    def test_window_longer_than_signal(self):
        with pytest.raises(SegmentError):
            segment(np.zeros(100), 64, 10, 0)

    def test_bad_overlap(self):
        with pytest.raises(SegmentError):
            segment(np.zeros(100), 1, 10, 10)


class TestClipAndScale:
    def test_examples(self):
        assert clip_and_scale(np.array([300.0]), 250, 1 / 250)[0] == 1.0
        assert clip_and_scale(np.array([0.0]), 250, 1 / 250)[0] == 0.0
        assert clip_and_scale(np.array([-500.0]), 250, 1 / 250)[0] == -1.0

    def test_default_scale_is_inverse_limit(self):
        out = clip_and_scale(np.array([125.0, -125.0]), 250)
        np.testing.assert_allclose(out, [0.5, -0.5])

    def test_inside_range_linear(self):
        x = np.linspace(-200, 200, 11)
        np.testing.assert_allclose(clip_and_scale(x, 250), x / 250)


class TestPsdWelch:
    def test_white_noise_total_power(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(64 * 600)
        est = psd_welch(x, 64, nperseg=64 * 8)
        df = est.freqs[1] - est.freqs[0]
        total = float(np.sum(est.power) * df)
        assert total == pytest.approx(float(np.var(x)), rel=0.05)

    def test_sinusoid_peak_bin(self):
        x = sinusoid(5, 64, 120)
        est = psd_welch(x, 64, nperseg=512)
        assert est.freqs[int(np.argmax(est.power))] == pytest.approx(5.0, abs=0.125)

    def test_zero_signal(self):
        est = psd_welch(np.zeros(1024), 64, 256)
        assert np.all(est.power == 0)

    def test_freq_grid(self):
        est = psd_welch(np.ones(1024), 64, 256)
        assert est.freqs[0] == 0.0
        assert est.freqs[-1] == 32.0
        assert np.all(np.diff(est.freqs) > 0)
        assert np.all(est.power >= 0)

    def test_nperseg_longer_than_signal(self):
        with pytest.raises(DspError):
            psd_welch(np.zeros(100), 64, 256)

    def test_empty_signal(self):
        with pytest.raises(DspError):
            psd_welch(np.array([]), 64, 16)


def band_energy(x, fs, lo, hi):
    spec = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(len(x), 1 / fs)
    return float(spec[(freqs >= lo) & (freqs < hi)].sum())


class TestBandDecompose:
    def test_five_hz_lands_in_second_band(self):
        x = sinusoid(5, 64, 120)
        parts = band_decompose(x, 64)
        energies = [float(np.sum(p[768:-768] ** 2)) for p in parts]
        assert int(np.argmax(energies)) == 1
        for k in (0, 2, 3):
            assert 10 * math.log10(energies[k] / energies[1]) < -20

    def test_dc_near_zero_everywhere(self):
        x = np.full(64 * 60, 25.0)
        for p in band_decompose(x, 64):
            assert np.max(np.abs(p[960:-960])) < 0.25

    def test_two_tones_separated(self):
        x = sinusoid(2, 64, 120) + sinusoid(10, 64, 120)
        parts = band_decompose(x, 64)
        assert projected_amplitude(parts[0], 64, 2) == pytest.approx(1.0, rel=0.05)
        assert projected_amplitude(parts[0], 64, 10) < 0.05
        assert projected_amplitude(parts[2], 64, 10) == pytest.approx(1.0, rel=0.05)
        assert projected_amplitude(parts[2], 64, 2) < 0.05

    def test_band_table(self):
        assert BANDS == ((0.5, 4.0), (4.0, 7.0), (7.0, 13.0), (13.0, 30.0))

    def test_low_rate_refused(self):
        with pytest.raises(FilterDesignError):
            band_decompose(np.zeros(6400), 32)


class TestEnvelope:
    def test_constant_amplitude_sinusoid(self):
        x = sinusoid(5, 64, 60, amplitude=2.0)
        env = envelope(x)
        mid = env[len(env) // 4 : -len(env) // 4]
        np.testing.assert_allclose(mid, 2.0, rtol=0.03)

    def test_zero_signal(self):
        assert np.all(envelope(np.zeros(64)) == 0)

    def test_tracks_modulator(self):
        fs = 64
        t = np.arange(fs * 120) / fs
        modulator = 1 + 0.5 * np.sin(0.5 * t)
        x = modulator * np.sin(10 * 2 * math.pi * t)
        env = envelope(x)
        sl = slice(len(env) // 4, -len(env) // 4)
        np.testing.assert_allclose(env[sl], modulator[sl], rtol=0.05)

    def test_nonnegative(self):
        x = np.random.default_rng(6).standard_normal(1000)
        assert np.all(envelope(x) >= 0)

    def test_peak_preserved_for_narrowband(self):
        x = sinusoid(3, 64, 60, amplitude=4.0)
        assert float(np.max(envelope(x))) >= 4.0 * 0.97

    def test_too_short(self):
        with pytest.raises(DspError):
            envelope(np.zeros(8))


class TestReeg:
    def test_constant_gives_zero(self):
        assert np.all(reeg(np.full(64 * 10, 3.0), 64) == 0)

    def test_sinusoid_peak_to_peak(self):
        x = sinusoid(5, 64, 20, amplitude=3.0)
        vals = reeg(x, 64, window=2.0)
        np.testing.assert_allclose(vals, 6.0, rtol=0.01)

    def test_amplitude_step(self):
        fs = 64
        x = np.concatenate(
            [sinusoid(2, fs, 300, amplitude=10.0), sinusoid(2, fs, 300, amplitude=50.0)]
        )
        vals = reeg(x, fs, window=2.0)
        np.testing.assert_allclose(vals[:150], 20.0, rtol=0.02)
        np.testing.assert_allclose(vals[151:], 100.0, rtol=0.02)

    def test_window_count(self):
        assert reeg(np.zeros(64 * 11), 64, window=2.0).shape == (5,)

    def test_window_too_long(self):
        with pytest.raises(DspError):
            reeg(np.zeros(64), 64, window=2.0)


class TestRms:
    def test_constant(self):
        np.testing.assert_allclose(rms(np.full(640, -4.0), 64, 1.0), 4.0)

    def test_unit_sinusoid(self):
        x = sinusoid(4, 64, 10)
        np.testing.assert_allclose(rms(x, 64, 1.0), 1 / math.sqrt(2), rtol=0.02)

    def test_zero(self):
        assert np.all(rms(np.zeros(640), 64, 1.0) == 0)

    def test_window_too_long(self):
        with pytest.raises(DspError):
            rms(np.zeros(32), 64, 1.0)
