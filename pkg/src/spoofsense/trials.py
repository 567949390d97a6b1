"""Dataset manifests, trial-pair construction, and embedding scoring.

Pair categories (positive = same-speaker decision expected):
  R    (+) real utterance pairs of one target speaker
  RI   (-) real target utterances across different speakers
  IAB  (+) one impersonator mimicking two different targets
  TI   (-) a target's real utterance vs an impersonation of that target
  IRAB (-) impersonators' own voices across different impersonators
  IRT  (-) an impersonator's own voice vs a target's real voice

Pairs are unordered, emitted once with utt_a < utt_b lexicographically,
sorted; construction is exhaustive over qualifying combinations.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    DuplicateUttId,
    EmptyCategory,
    MissingEmbedding,
    MissingMimickedTarget,
    ParseError,
    ZeroVector,
)

ROLES = frozenset(
    ("target-real", "impersonator-real", "impersonation", "bonafide", "spoof")
)
CATEGORIES = ("R", "RI", "IAB", "TI", "IRAB", "IRT")
POSITIVE_CATEGORIES = frozenset(("R", "IAB"))

REQUIRED_COLUMNS = ("utt_id", "speaker_id", "role", "path")
OPTIONAL_COLUMNS = ("mimicked_target_id", "attack_id")


@dataclass(frozen=True)
class ManifestRow:
    utt_id: str
    speaker_id: str
    role: str
    path: str
    mimicked_target_id: str = None
    attack_id: str = None


@dataclass(frozen=True)
class Manifest:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        seen = set()
        for r in self.rows:
            if r.utt_id in seen:
                raise DuplicateUttId(r.utt_id)
            seen.add(r.utt_id)

    def __len__(self):
        return len(self.rows)

    def by_role(self, role):
        return [r for r in self.rows if r.role == role]


def _none_if_empty(s):
    return None if s in ("", "-") else s


def load_manifest(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty manifest", line=1)
    header = lines[0].split("\t")
    for col in REQUIRED_COLUMNS:
        if col not in header:
            raise ParseError("missing column %r" % col, line=1)
    for col in header:
        if col not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS:
            raise ParseError("unknown column %r" % col, line=1)

    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(header):
            raise ParseError(
                "expected %d fields, got %d" % (len(header), len(parts)), line=lineno
            )
        rec = dict(zip(header, parts))
        role = rec["role"]
        if role not in ROLES:
            raise ParseError("unknown role %r" % role, line=lineno)
        mim = _none_if_empty(rec.get("mimicked_target_id", ""))
        if role == "impersonation" and mim is None:
            raise MissingMimickedTarget("line %d: %s" % (lineno, rec["utt_id"]))
        if role != "impersonation" and mim is not None:
            raise ParseError(
                "mimicked_target_id only belongs on impersonation rows", line=lineno
            )
        rows.append(
            ManifestRow(
                utt_id=rec["utt_id"],
                speaker_id=rec["speaker_id"],
                role=role,
                path=rec["path"],
                mimicked_target_id=mim,
                attack_id=_none_if_empty(rec.get("attack_id", "")),
            )
        )
    return Manifest(rows=rows)


def save_manifest(path, manifest):
    cols = REQUIRED_COLUMNS + OPTIONAL_COLUMNS
    with open(path, "w") as fh:
        fh.write("\t".join(cols) + "\n")
        for r in manifest.rows:
            fh.write(
                "\t".join(
                    (r.utt_id, r.speaker_id, r.role, r.path,
                     r.mimicked_target_id or "-", r.attack_id or "-")
                )
                + "\n"
            )


@dataclass(frozen=True)
class TrialPair:
    utt_a: str
    utt_b: str
    label: str      # positive | negative
    category: str


@dataclass(frozen=True)
class TrialSet:
    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self):
        return len(self.pairs)


def _emit(utts_a, utts_b, category):
    """Unordered cross pairs of two disjoint utterance lists."""
    label = "positive" if category in POSITIVE_CATEGORIES else "negative"
    return [
        TrialPair(*sorted((a, b)), label=label, category=category)
        for a in utts_a
        for b in utts_b
    ]


def _within_group_pairs(rows, category, exclude=None):
    label = "positive" if category in POSITIVE_CATEGORIES else "negative"
    out = []
    for a, b in itertools.combinations(sorted(rows, key=lambda r: r.utt_id), 2):
        if exclude and exclude(a, b):
            continue
        out.append(TrialPair(a.utt_id, b.utt_id, label=label, category=category))
    return out


def build_pairs(manifest, category):
    if category not in CATEGORIES:
        raise ValueError("unknown category %r" % category)
    target_real = manifest.by_role("target-real")
    imp_real = manifest.by_role("impersonator-real")
    imps = manifest.by_role("impersonation")

    pairs = []
    if category == "R":
        for _, group in itertools.groupby(
            sorted(target_real, key=lambda r: (r.speaker_id, r.utt_id)),
            key=lambda r: r.speaker_id,
        ):
            pairs += _within_group_pairs(list(group), "R")
    elif category == "RI":
        pairs = _within_group_pairs(
            target_real, "RI", exclude=lambda a, b: a.speaker_id == b.speaker_id
        )
    elif category == "IAB":
        for _, group in itertools.groupby(
            sorted(imps, key=lambda r: (r.speaker_id, r.utt_id)),
            key=lambda r: r.speaker_id,
        ):
            pairs += _within_group_pairs(
                list(group),
                "IAB",
                exclude=lambda a, b: a.mimicked_target_id == b.mimicked_target_id,
            )
    elif category == "TI":
        for imp in imps:
            own = [t.utt_id for t in target_real if t.speaker_id == imp.mimicked_target_id]
            pairs += _emit(own, [imp.utt_id], "TI")
    elif category == "IRAB":
        pairs = _within_group_pairs(
            imp_real, "IRAB", exclude=lambda a, b: a.speaker_id == b.speaker_id
        )
    elif category == "IRT":
        pairs = _emit([r.utt_id for r in imp_real], [r.utt_id for r in target_real], "IRT")

    if not pairs:
        raise EmptyCategory("no qualifying pairs for category %s" % category)
    return TrialSet(pairs=sorted(pairs, key=lambda p: (p.utt_a, p.utt_b)))


def build_all_pairs(manifest):
    """Every category that has qualifying pairs, in canonical order."""
    pairs = []
    for cat in CATEGORIES:
        try:
            pairs += build_pairs(manifest, cat).pairs
        except EmptyCategory:
            continue
    if not pairs:
        raise EmptyCategory("no category has qualifying pairs")
    return TrialSet(pairs=pairs)


def sample_pairs(ts, n, seed=0):
    """Seeded down-sample to n pairs, keeping the original ordering."""
    if n >= len(ts):
        return ts
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(ts), size=n, replace=False))
    return TrialSet(pairs=[ts.pairs[i] for i in idx])


def save_trials(path, ts):
    with open(path, "w") as fh:
        for p in ts.pairs:
            fh.write("%s\t%s\t%s\t%s\n" % (p.utt_a, p.utt_b, p.label, p.category))


def load_trials(path):
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError("expected 4 fields", line=lineno)
            a, b, label, cat = parts
            if label not in ("positive", "negative"):
                raise ParseError("unknown label %r" % label, line=lineno)
            if cat not in CATEGORIES:
                raise ParseError("unknown category %r" % cat, line=lineno)
            pairs.append(TrialPair(a, b, label=label, category=cat))
    return TrialSet(pairs=pairs)


@dataclass(frozen=True)
class Embeddings:
    dim: int
    vectors: dict  # utt_id -> np.ndarray


def load_embeddings(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("dim="):
        raise ParseError("embedding file must start with dim=<d>", line=1)
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise ParseError("bad dimension %r" % lines[0], line=1) from None
    if dim < 1:
        raise ParseError("dimension must be >= 1", line=1)

    vectors = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        utt, _, rest = line.partition("\t")
        if not rest:
            raise ParseError("expected utt_id<TAB>values", line=lineno)
        if utt in vectors:
            raise DuplicateUttId(utt)
        try:
            v = np.array([float(tok) for tok in rest.split()], dtype=np.float64)
        except ValueError:
            raise ParseError("non-numeric embedding value", line=lineno) from None
        if len(v) != dim:
            raise ParseError("expected %d values, got %d" % (dim, len(v)), line=lineno)
        if not np.all(np.isfinite(v)):
            raise ParseError("non-finite embedding value", line=lineno)
        vectors[utt] = v
    return Embeddings(dim=dim, vectors=vectors)


def save_embeddings(path, emb):
    with open(path, "w") as fh:
        fh.write("dim=%d\n" % emb.dim)
        for utt in sorted(emb.vectors):
            fh.write("%s\t%s\n" % (utt, " ".join("%.12g" % v for v in emb.vectors[utt])))


def cosine_score(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch("vectors of dim %d vs %d" % (a.size, b.size))
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class ScoredTrial:
    trial_id: str
    group: str
    label: str  # target | nontarget
    score: float


def score_trials(ts, emb):
    """One cosine score per pair.

    Negative categories keep their category as the score-file group;
    positive pairs get the shared group '-' so that every attack
    category is evaluated against the common pool of genuine pairs.
    """
    out = []
    for p in ts.pairs:
        for utt in (p.utt_a, p.utt_b):
            if utt not in emb.vectors:
                raise MissingEmbedding(utt)
        positive = p.label == "positive"
        out.append(
            ScoredTrial(
                trial_id="%s:%s" % (p.utt_a, p.utt_b),
                group="-" if positive else p.category,
                label="target" if positive else "nontarget",
                score=cosine_score(emb.vectors[p.utt_a], emb.vectors[p.utt_b]),
            )
        )
    return out


def to_scoreset(scored):
    from .metrics import ScoreSet

    return ScoreSet(
        scores=np.array([t.score for t in scored], dtype=np.float64),
        labels=np.array([t.label == "target" for t in scored], dtype=bool),
    )


def write_scorefile(path, scored):
    with open(path, "w") as fh:
        for t in scored:
            fh.write("%s\t%s\t%s\t%.12g\n" % (t.trial_id, t.group, t.label, t.score))
