"""WAV i/o, resampling, and framing primitives.

All feature code operates on mono float buffers at a single canonical rate
(16 kHz by default, set at load time).  The RIFF codec here is deliberately
minimal: PCM16 and float32, 1-2 channels, little-endian, nothing else.
"""

import struct
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.signal import firwin, resample_poly

from .errors import MalformedRiff, TruncatedData, UnsupportedEncoding

PCM16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono signal. samples: 1-D float64, nominally within [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("AudioBuffer wants a 1-D sample array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameSeries:
    """frames: (num_frames, frame_len); frame i starts at sample i*hop."""

    frames: np.ndarray
    hop: int
    frame_len: int
    sample_rate: int

    @property
    def num_frames(self):
        return self.frames.shape[0]


def read_wav(path):
    """Parse a RIFF/WAVE file into a mono AudioBuffer.

    Accepts PCM16 (format code 1) and IEEE float32 (code 3), 1 or 2
    channels; stereo is averaged.  PCM samples are scaled by 1/32768.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise MalformedRiff("file too small for a RIFF header")
    if raw[0:4] != b"RIFF":
        raise MalformedRiff("bad RIFF magic %r" % raw[0:4])
    if raw[8:12] != b"WAVE":
        raise MalformedRiff("not a WAVE form")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid, size = struct.unpack_from("<4sI", raw, pos)
        body = raw[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedRiff("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if len(body) < size:
                raise TruncatedData(
                    "data chunk declares %d bytes, file holds %d" % (size, len(body))
                )
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise MalformedRiff("missing fmt or data chunk")

    code, channels, rate, _byte_rate, _block_align, bits = fmt
    if code == 1:
        if bits != 16:
            raise UnsupportedEncoding("PCM with %d bits per sample" % bits)
        dtype = "<i2"
    elif code == 3:
        if bits != 32:
            raise UnsupportedEncoding("float with %d bits per sample" % bits)
        dtype = "<f4"
    else:
        raise UnsupportedEncoding("format code %d" % code)
    if channels not in (1, 2):
        raise UnsupportedEncoding("%d channels" % channels)
    if rate <= 0:
        raise MalformedRiff("nonpositive sample rate")

    x = np.frombuffer(data[: len(data) - len(data) % (channels * bits // 8)], dtype=dtype)
    x = x.astype(np.float64)
    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    if code == 1:
        x = x / PCM16_SCALE
    else:
        x = np.clip(x, -1.0, 1.0)
    return AudioBuffer(samples=x, sample_rate=rate)


def write_wav(path, buf):
    """Write a mono PCM16 WAV. Round-trips through read_wav within 1/32768."""
    q = np.clip(np.rint(buf.samples * PCM16_SCALE), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    hdr = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,  # PCM
        1,  # mono
        buf.sample_rate,
        buf.sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    with open(path, "wb") as fh:
        fh.write(hdr)
        fh.write(payload)


def resample(buf, target_rate):
    """Polyphase rational resampling with a Kaiser windowed-sinc filter.

    Cutoff sits at 0.45x the smaller Nyquist so the transition band stays
    clear of the band edge on both up- and downsampling.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == buf.sample_rate:
        return buf
    g = gcd(buf.sample_rate, target_rate)
    up, down = target_rate // g, buf.sample_rate // g
    cutoff_hz = 0.45 * (min(buf.sample_rate, target_rate) / 2.0)
    half_len = 10 * max(up, down)
    taps = firwin(
        2 * half_len + 1,
        cutoff_hz,
        fs=buf.sample_rate * up,
        window=("kaiser", 5.0),
    )
    y = resample_poly(buf.samples, up, down, window=taps)
    # the filter can overshoot near sharp edges; keep the buffer contract
    np.clip(y, -1.0, 1.0, out=y)
    return AudioBuffer(samples=y, sample_rate=target_rate)


def frame_signal(buf, frame_len, hop):
    """Slice into overlapping frames; a partial trailing frame is dropped."""
    if frame_len < 1 or hop < 1:
        raise ValueError("frame_len and hop must be >= 1")
    x = buf.samples
    if len(x) < frame_len:
        frames = np.empty((0, frame_len))
    else:
        frames = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop].copy()
    return FrameSeries(frames=frames, hop=hop, frame_len=frame_len, sample_rate=buf.sample_rate)


_WINDOWS = {
    "hann": np.hanning,      # symmetric; endpoints are exactly 0
    "hamming": np.hamming,
    "rect": np.ones,
}


def window_coeffs(kind, length):
    try:
        make = _WINDOWS[kind]
    except KeyError:
        raise ValueError("unknown window kind %r" % kind) from None
    return make(length)


def apply_window(frames, kind):
    w = window_coeffs(kind, frames.frame_len)
    return FrameSeries(
        frames=frames.frames * w,
        hop=frames.hop,
        frame_len=frames.frame_len,
        sample_rate=frames.sample_rate,
    )
