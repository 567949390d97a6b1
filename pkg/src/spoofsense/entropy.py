"""Power spectral entropy (PSE) of the F0 contour.

The pipeline: one-sided power spectral density of the trimmed contour,
normalized to a probability distribution over frequency bins, then Shannon
entropy in nats.  A flat spectrum (erratic contour) maximizes it; a contour
whose variation is concentrated at few frequencies scores near zero.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZeroPsd, SequenceTooShort, SpoofsenseError
from .f0 import F0Config, estimate_f0, trim_contour

# PSD bins this far (relatively) below the peak are rounding residue of the
# FFT, not signal: the DFT of a constant leaves ~1e-16-relative junk in the
# nonzero bins, which would otherwise leak into the entropy sum.
RELATIVE_FLOOR = 1e-28


@dataclass(frozen=True)
class PsdVector:
    values: np.ndarray
    n_bins: int


def power_spectral_density(seq, detrend=False):
    """One-sided PSD: values[i] = |X(w_i)|^2 / N for bins 0..floor(N/2)."""
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim != 1 or len(x) < 2:
        raise SequenceTooShort("PSD needs a 1-D sequence of length >= 2")
    if detrend:
        x = x - x.mean()
    p = np.abs(np.fft.rfft(x)) ** 2 / len(x)
    peak = p.max()
    if peak > 0.0:
        p[p < peak * RELATIVE_FLOOR] = 0.0
    return PsdVector(values=p, n_bins=len(p))


def normalize_psd(psd):
    total = psd.values.sum()
    if total <= 0.0:
        raise AllZeroPsd("PSD is identically zero")
    return psd.values / total


def power_spectral_entropy(seq, detrend=False):
    """-sum p_i ln p_i over the normalized PSD; 0 ln 0 = 0."""
    p = normalize_psd(power_spectral_density(seq, detrend=detrend))
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def utterance_pse(buf, cfg=None, detrend=False):
    """PSE of the trimmed F0 contour of one utterance."""
    contour = trim_contour(estimate_f0(buf, cfg or F0Config()))
    return power_spectral_entropy(contour.values, detrend=detrend)


@dataclass
class PseSummary:
    per_utt: dict = field(default_factory=dict)    # utt_id -> PSE
    errors: dict = field(default_factory=dict)     # utt_id -> message
    hist_edges: np.ndarray = None
    hist_counts: dict = field(default_factory=dict)  # label -> counts


def summarize_pse(values_by_utt, labels_by_utt, errors, n_bins=50):
    """Histogram finite PSE values per class label over their common range."""
    s = PseSummary(per_utt=dict(values_by_utt), errors=dict(errors))
    vals = np.array([v for v in values_by_utt.values()], dtype=np.float64)
    if len(vals) == 0:
        return s
    lo, hi = float(vals.min()), float(vals.max())
    if hi <= lo:
        hi = lo + 1.0  # all values identical; give the histogram some width
    s.hist_edges = np.linspace(lo, hi, n_bins + 1)
    for utt, v in values_by_utt.items():
        label = labels_by_utt[utt]
        if label not in s.hist_counts:
            s.hist_counts[label] = np.zeros(n_bins, dtype=int)
        idx = min(int((v - lo) / (hi - lo) * n_bins), n_bins - 1)
        s.hist_counts[label][idx] += 1
    return s


def pse_report(manifest, out_path, cfg=None, n_bins=50, reader=None):
    """Per-utterance PSE + per-label histograms, written as CSV.

    Rows that fail (unreadable audio, no voicing) are flagged "error" and do
    not abort the run.  `reader` maps a manifest row to an AudioBuffer and
    exists so callers can inject resampling or caching.
    """
    if reader is None:
        from .audio import read_wav

        reader = lambda row: read_wav(row.path)

    values, labels, errors = {}, {}, {}
    for row in sorted(manifest.rows, key=lambda r: r.utt_id):
        labels[row.utt_id] = row.role
        try:
            values[row.utt_id] = utterance_pse(reader(row), cfg)
        except (SpoofsenseError, OSError) as e:
            errors[row.utt_id] = str(e)

    s = summarize_pse(values, labels, errors, n_bins=n_bins)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["utt_id", "label", "pse"])
        for utt in sorted(labels):
            if utt in values:
                w.writerow([utt, labels[utt], "%.12g" % values[utt]])
            else:
                w.writerow([utt, labels[utt], "error"])
        if s.hist_edges is not None:
            for label in sorted(s.hist_counts):
                for i, n in enumerate(s.hist_counts[label]):
                    w.writerow(
                        ["#histogram", label, "%.12g" % s.hist_edges[i], "%.12g" % s.hist_edges[i + 1], int(n)]
                    )
    return s
