"""Fundamental-frequency contour estimation.

Normalized cross-correlation (autocorrelation with energy-matched
denominators) over 3-periods-of-floor windows, followed by parabolic peak
interpolation.  Unvoiced frames are encoded as 0.0 in the contour.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .audio import frame_signal
from .errors import EmptyAfterTrim, InputTooShort


@dataclass(frozen=True)
class F0Config:
    floor: float = 75.0
    ceil: float = 500.0
    hop: float = 0.005
    voicing_threshold: float = 0.3
    # a shorter-lag peak this close to the global best wins; guards against
    # locking onto 2x/3x the true period on slightly irregular voicing
    subharmonic_ratio: float = 0.85

    def __post_init__(self):
        if not 0 < self.floor < self.ceil:
            raise ValueError("need 0 < floor < ceil")
        if self.hop <= 0:
            raise ValueError("hop must be positive")
        if not 0.0 <= self.voicing_threshold <= 1.0:
            raise ValueError("voicing_threshold must be in [0, 1]")
        if not 0.0 < self.subharmonic_ratio <= 1.0:
            raise ValueError("subharmonic_ratio must be in (0, 1]")


@dataclass(frozen=True)
class F0Contour:
    values: np.ndarray  # Hz, 0.0 = unvoiced
    hop: float          # seconds
    floor: float
    ceil: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self):
        return len(self.values)


def _nccf(frames, kmin, kmax):
    """Normalized cross-correlation for lags kmin-1 .. kmax+1 (per frame).

    nccf[k] = sum(x[n] x[n+k]) / sqrt(E(x[:W-k]) E(x[k:])), so any exactly
    periodic frame scores 1.0 at its period regardless of amplitude.
    """
    nf, w = frames.shape
    nfft = next_fast_len(2 * w)
    spec = np.fft.rfft(frames, nfft, axis=1)
    corr = np.fft.irfft(np.abs(spec) ** 2, nfft, axis=1)

    lags = np.arange(kmin - 1, kmax + 2)
    cs = np.cumsum(frames**2, axis=1)
    total = cs[:, -1:]
    e_head = cs[:, w - 1 - lags]
    e_tail = total - cs[:, lags - 1]
    denom = np.sqrt(e_head * e_tail)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, corr[:, lags] / denom, 0.0)
    return lags, out


def _pick_peak(lags, row, kmin, kmax, ratio):
    """Smallest-lag local maximum within ratio of the global best."""
    band = slice(1, len(lags) - 1)  # interior of the padded lag range
    interior = row[band]
    is_max = (interior >= row[:-2]) & (interior >= row[2:])
    in_band = (lags[band] >= kmin) & (lags[band] <= kmax)
    best = np.max(interior[in_band])
    cand = np.flatnonzero(is_max & in_band & (interior >= ratio * best))
    if len(cand) == 0:
        cand = np.flatnonzero(in_band & (interior == best))
    i = cand[0] + 1  # back to padded-row indexing
    a, b, c = row[i - 1], row[i], row[i + 1]
    den = a + c - 2.0 * b
    delta = 0.0 if den == 0.0 else np.clip((a - c) / (2.0 * den), -0.5, 0.5)
    return lags[i] + delta, b


def estimate_f0(buf, cfg=None):
    """One F0 value per hop; frames with a weak correlation peak are 0."""
    cfg = cfg or F0Config()
    sr = buf.sample_rate
    if not (0 < cfg.floor < cfg.ceil <= sr / 2):
        raise ValueError("need 0 < floor < ceil <= Nyquist")
    if len(buf) < 2 * sr / cfg.floor:
        raise InputTooShort(
            "need at least two periods of the floor frequency (%d samples)"
            % int(np.ceil(2 * sr / cfg.floor))
        )

    frame_len = int(round(3 * sr / cfg.floor))
    hop = int(round(cfg.hop * sr))
    series = frame_signal(buf, frame_len, hop)
    if series.num_frames == 0:
        raise InputTooShort("shorter than one analysis window (%d samples)" % frame_len)

    frames = series.frames - series.frames.mean(axis=1, keepdims=True)
    kmin = int(np.ceil(sr / cfg.ceil))
    kmax = int(np.floor(sr / cfg.floor))
    if kmin < 2:
        raise ValueError("ceil too close to the sample rate")

    lags, nccf = _nccf(frames, kmin, kmax)
    energy = np.sum(frames**2, axis=1)

    values = np.zeros(series.num_frames)
    for i in range(series.num_frames):
        if energy[i] == 0.0:
            continue
        lag, peak = _pick_peak(lags, nccf[i], kmin, kmax, cfg.subharmonic_ratio)
        if peak < cfg.voicing_threshold:
            continue
        values[i] = np.clip(sr / lag, cfg.floor, cfg.ceil)
    return F0Contour(values=values, hop=cfg.hop, floor=cfg.floor, ceil=cfg.ceil)


def trim_contour(c):
    """Drop leading/trailing unvoiced frames; interior zeros stay."""
    nz = np.flatnonzero(c.values)
    if len(nz) == 0:
        raise EmptyAfterTrim("contour has no voiced frames")
    vals = c.values[nz[0] : nz[-1] + 1]
    return F0Contour(values=vals, hop=c.hop, floor=c.floor, ceil=c.ceil)


def voiced_runs(values):
    """Maximal runs of consecutive nonzero entries, as (start, stop) pairs."""
    v = np.asarray(values) != 0
    edges = np.diff(np.concatenate(([0], v.astype(int), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return list(zip(starts, stops))
