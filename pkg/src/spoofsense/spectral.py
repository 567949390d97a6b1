"""Frame-level spectral features: log-STFT, 39-dim MFCC, spectral envelope,
and band aperiodicity.

The envelope and aperiodicity are contour-guided: their framing is derived
from the F0 contour's hop and floor so that frame i of the feature matrix
describes the same stretch of signal as contour value i.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .audio import apply_window, frame_signal, window_coeffs
from .errors import AlignmentMismatch, InputTooShort, KindDimsMismatch

LOG_EPS = 1e-10

# dims each kind must carry in a feature file; None = variable (set by config)
KIND_DIMS = {
    "stft": None,
    "mfcc": 39,
    "sp": None,
    "ap": None,
    "f0": 1,
    "jitter-shimmer": 2,
    "pse": 1,
}


def check_kind_dims(kind, dims):
    if kind not in KIND_DIMS:
        raise KindDimsMismatch("unknown feature kind %r" % kind)
    want = KIND_DIMS[kind]
    if want is not None and dims != want:
        raise KindDimsMismatch("kind %r requires dims %d, got %d" % (kind, want, dims))
    if want is None and dims < 1:
        raise KindDimsMismatch("kind %r requires dims >= 1, got %d" % (kind, dims))


@dataclass(frozen=True)
class FeatureMatrix:
    kind: str
    data: np.ndarray  # (num_frames, dims)
    hop: float        # seconds between frames (0.0 for utterance-level rows)
    meta: str = ""    # source utterance id, if any

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("feature data must be 2-D (frames x dims)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature data contains non-finite entries")
        if not (np.isfinite(self.hop) and self.hop >= 0):
            raise ValueError("hop must be a finite nonnegative number of seconds")
        check_kind_dims(self.kind, arr.shape[1])
        object.__setattr__(self, "data", arr)

    @property
    def num_frames(self):
        return self.data.shape[0]

    @property
    def dims(self):
        return self.data.shape[1]


def _check_framing(n_fft, win_seconds, hop_seconds):
    if n_fft < 2:
        raise ValueError("n_fft must be >= 2")
    if win_seconds <= 0 or hop_seconds <= 0:
        raise ValueError("window and hop must be positive durations")


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 512
    win_seconds: float = 0.025
    hop_seconds: float = 0.010
    window: str = "hann"

    def __post_init__(self):
        _check_framing(self.n_fft, self.win_seconds, self.hop_seconds)
        if self.window not in ("hann", "hamming", "rect"):
            raise ValueError("unknown window %r" % self.window)


@dataclass(frozen=True)
class MfccConfig:
    n_mels: int = 26
    n_ceps: int = 13
    n_fft: int = 512
    win_seconds: float = 0.025
    hop_seconds: float = 0.010
    fmin: float = 0.0
    fmax: float = 8000.0
    delta_window: int = 2

    def __post_init__(self):
        _check_framing(self.n_fft, self.win_seconds, self.hop_seconds)
        if self.n_mels < 1 or self.n_ceps < 1:
            raise ValueError("n_mels and n_ceps must be >= 1")
        if self.n_ceps > self.n_mels:
            raise ValueError("n_ceps cannot exceed n_mels")
        if not 0 <= self.fmin < self.fmax:
            raise ValueError("need 0 <= fmin < fmax")
        if self.delta_window < 1:
            raise ValueError("delta_window must be >= 1")


@dataclass(frozen=True)
class EnvelopeConfig:
    n_fft: int = 1024
    # keep quefrencies below this fraction of the pitch period when voiced
    voiced_fraction: float = 0.8
    unvoiced_quefrency: float = 0.0025  # seconds

    def __post_init__(self):
        if self.n_fft < 2:
            raise ValueError("n_fft must be >= 2")
        if not 0 < self.voiced_fraction <= 1:
            raise ValueError("voiced_fraction must be in (0, 1]")
        if self.unvoiced_quefrency <= 0:
            raise ValueError("unvoiced_quefrency must be positive")


@dataclass(frozen=True)
class ApConfig:
    n_bands: int = 5
    n_fft: int = 1024

    def __post_init__(self):
        if self.n_bands < 1:
            raise ValueError("n_bands must be >= 1")
        if self.n_fft < 2:
            raise ValueError("n_fft must be >= 2")


def _windowed_frames(buf, win_seconds, hop_seconds, window, n_fft):
    win_len = int(round(win_seconds * buf.sample_rate))
    hop = int(round(hop_seconds * buf.sample_rate))
    if n_fft < win_len:
        raise ValueError("n_fft must cover the analysis window")
    series = frame_signal(buf, win_len, hop)
    if series.num_frames == 0:
        raise InputTooShort("need at least %d samples" % win_len)
    return apply_window(series, window)


def stft_spectrogram(buf, cfg=None, meta=""):
    """log(|X| + eps) of the one-sided FFT per frame; dims n_fft/2+1."""
    cfg = cfg or StftConfig()
    series = _windowed_frames(buf, cfg.win_seconds, cfg.hop_seconds, cfg.window, cfg.n_fft)
    mag = np.abs(np.fft.rfft(series.frames, cfg.n_fft, axis=1))
    return FeatureMatrix(kind="stft", data=np.log(mag + LOG_EPS), hop=cfg.hop_seconds, meta=meta)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels, n_fft, sample_rate, fmin, fmax):
    """Triangular filters on the HTK mel scale, anchored to FFT bin indices."""
    pts = _mel_to_hz(np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2))
    bins = np.floor((n_fft + 1) * pts / sample_rate).astype(int)
    fb = np.zeros((n_mels, n_fft // 2 + 1))
    for m in range(1, n_mels + 1):
        lo, mid, hi = bins[m - 1], bins[m], bins[m + 1]
        for k in range(lo, mid):
            fb[m - 1, k] = (k - lo) / max(1, mid - lo)
        for k in range(mid, hi):
            fb[m - 1, k] = (hi - k) / max(1, hi - mid)
    return fb


def delta(m, window=2):
    """Regression slope over +-window frames, edges replicated."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[0] == 0:
        return m.copy()
    pad = np.pad(m, ((window, window), (0, 0)), mode="edge")
    num = np.zeros_like(m)
    for n in range(1, window + 1):
        num += n * (pad[window + n : window + n + m.shape[0]] - pad[window - n : window - n + m.shape[0]])
    return num / (2.0 * sum(n * n for n in range(1, window + 1)))


def mfcc(buf, cfg=None, meta=""):
    """13 cepstra (DCT-II of log mel energies) + deltas + delta-deltas = 39."""
    cfg = cfg or MfccConfig()
    series = _windowed_frames(buf, cfg.win_seconds, cfg.hop_seconds, "hann", cfg.n_fft)
    power = np.abs(np.fft.rfft(series.frames, cfg.n_fft, axis=1)) ** 2
    fb = mel_filterbank(cfg.n_mels, cfg.n_fft, buf.sample_rate, cfg.fmin, cfg.fmax)
    logmel = np.log(power @ fb.T + LOG_EPS)
    static = dct(logmel, type=2, norm="ortho", axis=1)[:, : cfg.n_ceps]
    d1 = delta(static, cfg.delta_window)
    d2 = delta(d1, cfg.delta_window)
    return FeatureMatrix(
        kind="mfcc", data=np.hstack([static, d1, d2]), hop=cfg.hop_seconds, meta=meta
    )


def _contour_frames(buf, contour, n_fft):
    """Frame exactly as the contour was framed; lengths must agree."""
    sr = buf.sample_rate
    frame_len = int(round(3 * sr / contour.floor))
    hop = int(round(contour.hop * sr))
    if n_fft < frame_len:
        raise ValueError("n_fft must cover the analysis window")
    series = frame_signal(buf, frame_len, hop)
    if series.num_frames != len(contour):
        raise AlignmentMismatch(
            "contour has %d frames, buffer frames to %d" % (len(contour), series.num_frames)
        )
    w = window_coeffs("hann", frame_len)
    return series.frames * w, frame_len, hop


def spectral_envelope(buf, contour, cfg=None, meta=""):
    """Cepstrally smoothed power-spectrum envelope, one row per contour frame.

    Liftering keeps quefrencies below 0.8 pitch periods (voiced) or 2.5 ms
    (unvoiced), discarding harmonic fine structure but keeping resonances.
    """
    cfg = cfg or EnvelopeConfig()
    frames, _, _ = _contour_frames(buf, contour, cfg.n_fft)
    sr = buf.sample_rate
    power = np.abs(np.fft.rfft(frames, cfg.n_fft, axis=1)) ** 2
    logp = np.log(power + LOG_EPS)
    ceps = np.fft.irfft(logp, cfg.n_fft, axis=1)

    out = np.empty_like(logp)
    half = cfg.n_fft // 2
    for i in range(frames.shape[0]):
        f0 = contour.values[i]
        q_sec = cfg.voiced_fraction / f0 if f0 > 0 else cfg.unvoiced_quefrency
        cut = int(np.clip(round(q_sec * sr), 1, half))
        c = ceps[i].copy()
        c[cut : cfg.n_fft - cut + 1] = 0.0
        out[i] = np.fft.rfft(c).real
    return FeatureMatrix(kind="sp", data=np.exp(out), hop=contour.hop, meta=meta)


def band_edges(n_bands, nyquist):
    """Octave-spaced edges ending at Nyquist, e.g. 0,500,1k,2k,4k,8k."""
    return np.concatenate(([0.0], nyquist / 2.0 ** np.arange(n_bands - 1, -1, -1)))


def band_aperiodicity(buf, contour, cfg=None, meta=""):
    """Per-band ratio of non-harmonic to total energy, in [0, 1].

    Bins within two analysis-bin widths of any F0 harmonic are treated as
    harmonic; the noise level of the remaining bins is extrapolated across
    the whole band to estimate the aperiodic share.  Unvoiced frames are
    1.0 everywhere by convention.
    """
    cfg = cfg or ApConfig()
    frames, frame_len, _ = _contour_frames(buf, contour, cfg.n_fft)
    sr = buf.sample_rate
    power = np.abs(np.fft.rfft(frames, cfg.n_fft, axis=1)) ** 2
    freqs = np.arange(cfg.n_fft // 2 + 1) * (sr / cfg.n_fft)
    edges = band_edges(cfg.n_bands, sr / 2.0)
    bands = []
    for b in range(cfg.n_bands):
        top = freqs <= edges[b + 1] if b == cfg.n_bands - 1 else freqs < edges[b + 1]
        bands.append((freqs >= edges[b]) & top)
    notch_hw = 2.0 * sr / frame_len  # main-lobe half-width of the hann window

    out = np.ones((frames.shape[0], cfg.n_bands))
    for i in range(frames.shape[0]):
        f0 = contour.values[i]
        if f0 <= 0:
            continue
        p = power[i]
        # k = 0 included: a periodic cycle with nonzero mean puts a line at DC
        harmonics = np.arange(0, int(np.floor((sr / 2.0) / f0)) + 1) * f0
        harmonic_bins = np.zeros(len(freqs), dtype=bool)
        for h in harmonics:
            harmonic_bins |= np.abs(freqs - h) <= notch_hw
        for b, band in enumerate(bands):
            total = np.sum(p[band])
            if total <= 0.0:
                out[i, b] = 1.0
                continue
            noise_bins = band & ~harmonic_bins
            if not np.any(noise_bins):
                out[i, b] = 0.0  # harmonics blanket the band; nothing to measure
                continue
            residual = np.mean(p[noise_bins]) * np.count_nonzero(band)
            out[i, b] = np.clip(residual / total, 0.0, 1.0)
    return FeatureMatrix(kind="ap", data=out, hop=contour.hop, meta=meta)
