"""
Preprocessing chain tests

Run with:
pytest test_preprocess.py
"""

import numpy as np
import pytest

from app.exceptions import InvalidParameterError, SchemaMismatchError
from app.preprocess import (
    BaselineMode,
    FilterSpec,
    bandpass_filter,
    baseline_correct,
    design_filter,
    notch_filter,
    padding_length,
    preprocess_recording,
    rereference_average,
)
from app.signal_io import Recording

FS = 256.0
N_SAMPLES = 60 * 256


def _tone_recording(freq, n_samples=N_SAMPLES, fs=FS):
    t = np.arange(n_samples) / fs
    tone = np.sin(2 * np.pi * freq * t)
    return Recording(sample_rate=fs, channels=("a", "b"), data=np.column_stack([tone, 0.5 * tone]))


def _gain(original, filtered):
    """Amplitude ratio over the middle half, away from the edges."""
    n = original.shape[0]
    middle = slice(n // 4, 3 * n // 4)
    return np.sqrt(np.mean(filtered[middle] ** 2) / np.mean(original[middle] ** 2))


def _db(ratio):
    return 20 * np.log10(ratio)


# ============= BAND-PASS =============

@pytest.mark.parametrize("freq", [2.0, 10.0, 20.0, 30.0, 40.0])
def test_bandpass_passband_is_flat(freq):
    rec = _tone_recording(freq)
    out = bandpass_filter(rec, 0.1, 45.0)
    assert abs(_db(_gain(rec.data[:, 0], out.data[:, 0]))) <= 1.0


def test_bandpass_attenuates_80hz():
    rec = _tone_recording(80.0)
    out = bandpass_filter(rec, 0.1, 45.0)
    assert _db(_gain(rec.data[:, 0], out.data[:, 0])) <= -20.0


def test_bandpass_zero_in_zero_out():
    rec = Recording(sample_rate=FS, channels=("a", "b"), data=np.zeros((N_SAMPLES, 2)))
    out = bandpass_filter(rec, 0.1, 45.0)
    assert np.array_equal(out.data, np.zeros((N_SAMPLES, 2)))


def test_bandpass_is_zero_phase():
    rec = _tone_recording(10.0)
    out = bandpass_filter(rec, 0.1, 45.0)

    middle = slice(N_SAMPLES // 4, 3 * N_SAMPLES // 4)
    x, y = rec.data[middle, 0], out.data[:, 0]
    lags = range(-5, 6)
    scores = [np.dot(x, y[N_SAMPLES // 4 + lag: 3 * N_SAMPLES // 4 + lag]) for lag in lags]
    assert list(lags)[int(np.argmax(scores))] == 0


def test_bandpass_is_linear(make_recording):
    x = make_recording(n_samples=N_SAMPLES, n_channels=3)
    y = make_recording(n_samples=N_SAMPLES, n_channels=3)
    combined = x.with_data(2.5 * x.data - 0.75 * y.data)

    lhs = bandpass_filter(combined, 0.1, 45.0).data
    rhs = 2.5 * bandpass_filter(x, 0.1, 45.0).data - 0.75 * bandpass_filter(y, 0.1, 45.0).data
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-9 * np.max(np.abs(rhs)))


def test_bandpass_preserves_shape_and_input(make_recording):
    rec = make_recording(n_samples=N_SAMPLES)
    before = rec.data.copy()
    out = bandpass_filter(rec, 0.1, 45.0)
    assert out.data.shape == rec.data.shape
    assert out.channels == rec.channels
    assert np.array_equal(rec.data, before)


def test_bandpass_rejects_cutoff_at_nyquist():
    with pytest.raises(InvalidParameterError, match="Nyquist"):
        bandpass_filter(_tone_recording(10.0), 0.1, 128.0)


def test_bandpass_rejects_recording_shorter_than_padding():
    short = _tone_recording(10.0, n_samples=1000)
    with pytest.raises(InvalidParameterError, match="samples"):
        bandpass_filter(short, 0.1, 45.0)


def test_padding_length_grows_with_slower_poles():
    slow = padding_length(design_filter(FilterSpec.bandpass(0.1, 45.0), FS))
    fast = padding_length(design_filter(FilterSpec.bandpass(5.0, 45.0), FS))
    assert slow > fast > 0


# ============= NOTCH =============

def test_notch_removes_mains_tone():
    rec = _tone_recording(50.0)
    out = notch_filter(rec, 50.0)
    assert _gain(rec.data[:, 0], out.data[:, 0]) <= 10 ** (-30 / 20)


@pytest.mark.parametrize("freq", [20.0, 40.0, 60.0])
def test_notch_keeps_neighbouring_tones(freq):
    rec = _tone_recording(freq)
    out = notch_filter(rec, 50.0)
    assert abs(_db(_gain(rec.data[:, 0], out.data[:, 0]))) <= 1.0


def test_notch_zero_in_zero_out():
    rec = Recording(sample_rate=FS, channels=("a", "b"), data=np.zeros((4096, 2)))
    assert np.array_equal(notch_filter(rec, 50.0).data, np.zeros((4096, 2)))


def test_notch_order_must_be_even():
    with pytest.raises(InvalidParameterError, match="even"):
        notch_filter(_tone_recording(10.0), 50.0, order=3)


def test_notch_center_above_nyquist():
    with pytest.raises(InvalidParameterError):
        notch_filter(_tone_recording(10.0), 130.0)


# ============= RE-REFERENCING =============

def test_rereference_with_zero_reference_is_identity(rng):
    data = rng.standard_normal((100, 3))
    data[:, 2] = 0.0
    rec = Recording(sample_rate=FS, channels=("a", "b", "ref"), data=data)
    assert np.array_equal(rereference_average(rec, ["ref"]).data, data)


def test_rereference_single_channel_algebra(rng):
    data = rng.standard_normal((50, 2))
    rec = Recording(sample_rate=FS, channels=("a", "b"), data=data)

    out = rereference_average(rec, ["b"])

    np.testing.assert_allclose(out.data[:, 0], data[:, 0] - data[:, 1], atol=1e-15)
    assert np.array_equal(out.data[:, 1], np.zeros(50))


def test_rereference_zeroes_reference_mean(rng):
    rec = Recording(sample_rate=FS, channels=("c1", "c2", "c3", "c4"),
                    data=rng.standard_normal((200, 4)))
    out = rereference_average(rec, ["c3", "c4"])
    np.testing.assert_allclose(out.data[:, 2:].mean(axis=1), 0.0, atol=1e-12)


def test_rereference_unknown_label(make_recording):
    with pytest.raises(InvalidParameterError, match="unknown channel"):
        rereference_average(make_recording(), ["m1"])


# ============= BASELINE =============

def test_baseline_with_zero_mean_leaves_recording(make_recording, rng):
    rec = make_recording(n_samples=100, n_channels=2)
    base = rng.standard_normal((100, 2))
    base -= base.mean(axis=0)
    baseline = rec.with_data(base)
    np.testing.assert_allclose(baseline_correct(rec, baseline).data, rec.data, atol=1e-12)


def test_baseline_constant_offset(make_recording):
    rec = make_recording(n_samples=100, n_channels=2)
    base = np.zeros((80, 2))
    base[:, 1] = 5.0
    baseline = Recording(sample_rate=rec.sample_rate, channels=rec.channels, data=base)

    out = baseline_correct(rec, baseline)

    np.testing.assert_allclose(out.data[:, 0], rec.data[:, 0], atol=1e-12)
    np.testing.assert_allclose(out.data[:, 1], rec.data[:, 1] - 5.0, atol=1e-12)


def test_baseline_means_subtract(make_recording):
    rec = make_recording(n_samples=300, n_channels=4)
    baseline = make_recording(n_samples=150, n_channels=4)
    out = baseline_correct(rec, baseline)
    np.testing.assert_allclose(out.data.mean(axis=0),
                               rec.data.mean(axis=0) - baseline.data.mean(axis=0), atol=1e-12)


def test_baseline_zscore_mode(make_recording):
    rec = make_recording(n_samples=300, n_channels=2)
    baseline = make_recording(n_samples=300, n_channels=2)
    out = baseline_correct(rec, baseline, BaselineMode.ZSCORE)
    expected = (rec.data - baseline.data.mean(axis=0)) / baseline.data.std(axis=0)
    np.testing.assert_allclose(out.data, expected, atol=1e-12)


def test_baseline_channel_mismatch(make_recording):
    rec = make_recording(n_channels=3)
    other = make_recording(n_channels=3, channels=("x", "y", "z"))
    with pytest.raises(SchemaMismatchError):
        baseline_correct(rec, other)


# ============= FULL CHAIN =============

def test_preprocess_chain_keeps_shape_and_metadata(make_recording):
    rec = make_recording(n_samples=N_SAMPLES, n_channels=4, subject_id="sub-007")
    baseline = make_recording(n_samples=N_SAMPLES, n_channels=4)

    out = preprocess_recording(rec, reference_labels=["c3", "c4"], baseline=baseline)

    assert out.data.shape == rec.data.shape
    assert out.subject_id == "sub-007"
    assert out.session == rec.session


def test_preprocess_chain_skips_disabled_steps(make_recording):
    rec = make_recording(n_samples=64)
    out = preprocess_recording(rec, bandpass=None, notch=None)
    assert np.array_equal(out.data, rec.data)
