"""EER and minimum normalized t-DCF via exhaustive threshold sweeps.

Acceptance rule everywhere: a trial is accepted iff score >= threshold.
Candidate thresholds are the distinct observed scores plus +inf (reject
all); every achievable operating point appears in that sweep.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, IllPosedCostModel, ParseError

POSITIVE_LABELS = frozenset(("target", "bonafide"))
NEGATIVE_LABELS = frozenset(("nontarget", "spoof"))


@dataclass(frozen=True)
class ScoreSet:
    scores: np.ndarray
    labels: np.ndarray  # bool, True = positive class (target / bonafide)

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        l = np.asarray(self.labels, dtype=bool)
        if s.ndim != 1 or s.shape != l.shape:
            raise ValueError("scores and labels must be parallel 1-D sequences")
        if not np.all(np.isfinite(s)):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "labels", l)

    def split(self):
        if not self.labels.any() or self.labels.all():
            raise DegenerateLabels("need at least one positive and one negative trial")
        return np.sort(self.scores[self.labels]), np.sort(self.scores[~self.labels])


@dataclass(frozen=True)
class CostModel:
    p_target: float
    p_nontarget: float
    p_spoof: float
    c_miss_asv: float
    c_fa_asv: float
    c_miss_cm: float
    c_fa_cm: float
    p_miss_asv: float
    p_fa_asv: float
    p_miss_spoof_asv: float

    def __post_init__(self):
        priors = (self.p_target, self.p_nontarget, self.p_spoof)
        if min(priors) < 0 or abs(sum(priors) - 1.0) > 1e-9:
            raise ValueError("priors must be nonnegative and sum to 1")
        if min(self.c_miss_asv, self.c_fa_asv, self.c_miss_cm, self.c_fa_cm) <= 0:
            raise ValueError("costs must be positive")
        for r in (self.p_miss_asv, self.p_fa_asv, self.p_miss_spoof_asv):
            if not 0.0 <= r <= 1.0:
                raise ValueError("ASV error rates must lie in [0, 1]")

    def coefficients(self):
        """(C1, C2): weights of the CM miss and false-alarm rates."""
        c1 = self.p_target * (self.c_miss_cm - self.c_miss_asv * self.p_miss_asv) \
            - self.p_nontarget * self.c_fa_asv * self.p_fa_asv
        c2 = self.c_fa_cm * self.p_spoof * (1.0 - self.p_miss_spoof_asv)
        if c1 <= 0 or c2 <= 0:
            raise IllPosedCostModel("cost model gives C1=%g, C2=%g" % (c1, c2))
        return c1, c2


def _sweep(s):
    """Thresholds (ascending, +inf last) with FAR/FRR at each."""
    pos, neg = s.split()
    thresholds = np.unique(s.scores)
    thresholds = np.append(thresholds, np.inf)
    far = (len(neg) - np.searchsorted(neg, thresholds, side="left")) / len(neg)
    frr = np.searchsorted(pos, thresholds, side="left") / len(pos)
    return thresholds, far, frr


@dataclass(frozen=True)
class EerResult:
    eer: float
    threshold: float


def eer(s, method="midpoint"):
    """EER at the sweep point minimizing |FAR - FRR| (ties: smaller threshold).

    method="midpoint" reports (FAR+FRR)/2 there; "interp" linearly
    interpolates the crossing between the bracketing sweep points.
    """
    t, far, frr = _sweep(s)
    if method == "midpoint":
        i = int(np.argmin(np.abs(far - frr)))
        return EerResult(eer=float((far[i] + frr[i]) / 2.0), threshold=float(t[i]))
    if method != "interp":
        raise ValueError("unknown EER method %r" % method)
    d = far - frr  # nonincreasing; starts +1 region, ends at -1
    j = int(np.argmax(d <= 0))
    if d[j] == 0:
        return EerResult(eer=float(far[j]), threshold=float(t[j]))
    i = j - 1
    w = d[i] / (d[i] - d[j])
    value = float(frr[i] + w * (frr[j] - frr[i]))
    thr = float(t[i] if np.isinf(t[j]) else t[i] + w * (t[j] - t[i]))
    return EerResult(eer=value, threshold=thr)


@dataclass(frozen=True)
class TdcfResult:
    min_tdcf_norm: float
    threshold: float


def min_tdcf(cm, cost):
    """Minimum of (C1 P_miss + C2 P_fa) / min(C1, C2) over all thresholds."""
    c1, c2 = cost.coefficients()
    t, far, frr = _sweep(cm)  # far = spoof accepted, frr = bonafide rejected
    tdcf = (c1 * frr + c2 * far) / min(c1, c2)
    i = int(np.argmin(tdcf))
    return TdcfResult(min_tdcf_norm=float(tdcf[i]), threshold=float(t[i]))


def det_points(s):
    """(FAR, FRR) per sweep threshold; FAR falls and FRR rises along it."""
    _, far, frr = _sweep(s)
    return np.column_stack([far, frr])


@dataclass(frozen=True)
class GroupReport:
    group: str
    n_pos: int
    n_neg: int
    eer: float
    threshold: float
    min_tdcf: float = None


def parse_scorefile(path):
    """Rows of (trial_id, group, is_positive, score); group '-' = ungrouped."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError("expected 4 tab-separated fields", line=lineno)
            trial_id, group, label, score_text = parts
            if label in POSITIVE_LABELS:
                is_pos = True
            elif label in NEGATIVE_LABELS:
                is_pos = False
            else:
                raise ParseError("unknown label %r" % label, line=lineno)
            try:
                score = float(score_text)
            except ValueError:
                raise ParseError("bad score %r" % score_text, line=lineno) from None
            if not np.isfinite(score):
                raise ParseError("non-finite score", line=lineno)
            rows.append((trial_id, group, is_pos, score))
    return rows


def evaluate_scorefile(path, mode="eer", cost=None, method="midpoint"):
    """Per-group and pooled metrics.

    Ungrouped rows (group '-') are shared into every named group, mirroring
    protocols where one bonafide set is reused against each attack; the ALL
    row pools everything.
    """
    if mode not in ("eer", "tdcf"):
        raise ValueError("mode must be 'eer' or 'tdcf'")
    if mode == "tdcf" and cost is None:
        raise ValueError("tdcf mode needs a CostModel")
    rows = parse_scorefile(path)
    named = sorted({g for _, g, _, _ in rows if g != "-"})
    shared = [r for r in rows if r[1] == "-"]
    reports = []
    for group in named + ["ALL"]:
        members = rows if group == "ALL" else [r for r in rows if r[1] == group] + shared
        labels = np.array([r[2] for r in members], dtype=bool)
        scores = np.array([r[3] for r in members], dtype=np.float64)
        s = ScoreSet(scores=scores, labels=labels)
        e = eer(s, method=method)
        td = min_tdcf(s, cost).min_tdcf_norm if mode == "tdcf" else None
        reports.append(
            GroupReport(
                group=group,
                n_pos=int(labels.sum()),
                n_neg=int((~labels).sum()),
                eer=e.eer,
                threshold=e.threshold,
                min_tdcf=td,
            )
        )
    return reports


def write_report(reports, fh):
    w = csv.writer(fh)
    with_tdcf = any(r.min_tdcf is not None for r in reports)
    header = ["group", "n_pos", "n_neg", "eer", "threshold"]
    if with_tdcf:
        header.append("min_tdcf")
    w.writerow(header)
    for r in reports:
        row = [r.group, r.n_pos, r.n_neg, "%.12g" % r.eer, "%.12g" % r.threshold]
        if with_tdcf:
            row.append("%.12g" % r.min_tdcf)
        w.writerow(row)
