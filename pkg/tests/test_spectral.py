import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from conftest import SR, tone
from spoofsense.audio import AudioBuffer
from spoofsense.errors import AlignmentMismatch, InputTooShort, KindDimsMismatch
from spoofsense.f0 import F0Config, F0Contour, estimate_f0
from spoofsense.spectral import (
    ApConfig,
    FeatureMatrix,
    LOG_EPS,
    band_aperiodicity,
    band_edges,
    check_kind_dims,
    delta,
    mel_filterbank,
    mfcc,
    spectral_envelope,
    stft_spectrogram,
)


def test_stft_shape_and_tone_bin():
    m = stft_spectrogram(tone(1000, dur=2.0))
    assert m.kind == "stft"
    assert m.dims == 257
    assert m.num_frames == (2 * SR - 400) // 160 + 1 == 198
    assert m.hop == 0.010
    # 1 kHz at n_fft 512 / 16 kHz -> bin 32
    assert np.argmax(m.data.mean(axis=0)) == 32


def test_stft_silence_floor():
    m = stft_spectrogram(AudioBuffer(np.zeros(SR), SR))
    np.testing.assert_array_equal(m.data, np.log(LOG_EPS))


def test_stft_too_short():
    with pytest.raises(InputTooShort):
        stft_spectrogram(AudioBuffer(np.zeros(100), SR))


def test_mfcc_dims_and_framing():
    m = mfcc(tone(220, dur=2.0))
    assert m.kind == "mfcc"
    assert m.dims == 39
    assert m.num_frames == 198


def test_mfcc_constant_input_deltas_zero():
    m = mfcc(AudioBuffer(np.ones(SR), SR))
    np.testing.assert_array_equal(m.data[:, 13:], 0.0)


def test_delta_of_linear_ramp_is_slope():
    ramp = np.arange(50, dtype=float)[:, None] * np.array([1.0, 2.0])
    d = delta(ramp, window=2)
    np.testing.assert_allclose(d[2:-2], np.tile([1.0, 2.0], (46, 1)), atol=1e-12)


def naive_delta(m, w):
    n = len(m)
    out = np.zeros_like(m)
    denom = 2 * sum(k * k for k in range(1, w + 1))
    for t in range(n):
        acc = np.zeros(m.shape[1])
        for k in range(1, w + 1):
            acc += k * (m[min(t + k, n - 1)] - m[max(t - k, 0)])
        out[t] = acc / denom
    return out


@given(
    m=hnp.arrays(
        np.float64,
        st.tuples(st.integers(3, 40), st.integers(1, 8)),
        elements=st.floats(-100, 100),
    ),
    w=st.integers(1, 4),
)
@settings(max_examples=60, deadline=None)
def test_delta_matches_naive(m, w):
    np.testing.assert_allclose(delta(m, window=w), naive_delta(m, w), atol=1e-9)


def test_mel_filterbank_shape_and_coverage():
    fb = mel_filterbank(26, 512, SR, 0.0, 8000.0)
    assert fb.shape == (26, 257)
    assert np.all(fb >= 0)
    assert np.all(fb.sum(axis=1) > 0)  # every filter has support
    # interior bins are covered by at least one triangle
    covered = fb.sum(axis=0)[5:250]
    assert np.all(covered > 0)


def _flat_contour(buf, f0, cfg=None):
    cfg = cfg or F0Config()
    frame_len = int(round(3 * buf.sample_rate / cfg.floor))
    hop = int(round(cfg.hop * buf.sample_rate))
    n = (len(buf) - frame_len) // hop + 1
    return F0Contour(values=np.full(n, float(f0)), hop=cfg.hop, floor=cfg.floor, ceil=cfg.ceil)


def test_envelope_shape_and_peak():
    buf = tone(1000, dur=1.0)
    m = spectral_envelope(buf, _flat_contour(buf, 250.0))
    assert m.kind == "sp"
    assert m.dims == 513
    assert np.all(m.data > 0)
    assert np.argmax(m.data.mean(axis=0)) == 64  # 1 kHz at n_fft 1024 / 16 kHz


def test_envelope_magnitude_only():
    # time reversal permutes the analysis frames but leaves each frame's
    # magnitude spectrum unchanged (symmetric window), so the envelope set
    # must match exactly
    n = 640 + 40 * 80
    rng = np.random.default_rng(0)
    x = rng.normal(size=n) * 0.1
    buf = AudioBuffer(x, SR)
    rev = AudioBuffer(x[::-1].copy(), SR)
    a = spectral_envelope(buf, _flat_contour(buf, 200.0))
    b = spectral_envelope(rev, _flat_contour(rev, 200.0))
    np.testing.assert_allclose(a.data, b.data[::-1], rtol=1e-10)


def test_envelope_alignment_mismatch():
    buf = tone(200, dur=1.0)
    bad = F0Contour(values=np.full(7, 200.0), hop=0.005, floor=75, ceil=500)
    with pytest.raises(AlignmentMismatch):
        spectral_envelope(buf, bad)


def test_band_edges():
    np.testing.assert_allclose(band_edges(5, 8000.0), [0, 500, 1000, 2000, 4000, 8000])
    np.testing.assert_allclose(band_edges(3, 8000.0), [0, 2000, 4000, 8000])


def test_ap_harmonic_pulse_low_band():
    # periodic pulse train: nearly all energy on the harmonic comb
    x = np.zeros(SR)
    x[::160] = 1.0  # 100 Hz
    buf = AudioBuffer(x, SR)
    m = band_aperiodicity(buf, _flat_contour(buf, 100.0))
    assert m.kind == "ap"
    assert m.dims == 5
    assert np.all((m.data >= 0) & (m.data <= 1))
    assert m.data[:, 0].mean() < 0.05


def test_ap_noise_is_aperiodic():
    rng = np.random.default_rng(1)
    buf = AudioBuffer(rng.normal(size=SR) * 0.1, SR)
    m = band_aperiodicity(buf, _flat_contour(buf, 150.0))
    assert m.data.mean() > 0.9


def test_ap_unvoiced_rows_are_one():
    buf = tone(200, dur=1.0)
    c = _flat_contour(buf, 200.0)
    vals = c.values.copy()
    vals[:10] = 0.0
    c = F0Contour(values=vals, hop=c.hop, floor=c.floor, ceil=c.ceil)
    m = band_aperiodicity(buf, c)
    np.testing.assert_array_equal(m.data[:10], 1.0)
    # the tone sits at 200 Hz, so band 0 [0, 500) is strongly periodic
    assert m.data[10:, 0].mean() < 0.1


def test_ap_scale_invariance():
    buf = tone(200, dur=0.8)
    c = _flat_contour(buf, 200.0)
    a = band_aperiodicity(buf, c).data
    b = band_aperiodicity(AudioBuffer(buf.samples * 4.0, SR), c).data
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        FeatureMatrix(kind="stft", data=np.zeros(5), hop=0.01)  # 1-D
    with pytest.raises(ValueError):
        FeatureMatrix(kind="stft", data=np.full((2, 3), np.nan), hop=0.01)
    with pytest.raises(ValueError):
        FeatureMatrix(kind="stft", data=np.zeros((2, 3)), hop=np.nan)


def test_kind_dims_rules():
    check_kind_dims("mfcc", 39)
    check_kind_dims("stft", 257)  # free-dim kind
    with pytest.raises(KindDimsMismatch):
        check_kind_dims("mfcc", 40)
    with pytest.raises(KindDimsMismatch):
        check_kind_dims("nope", 3)
    with pytest.raises(KindDimsMismatch):
        check_kind_dims("pse", 2)
