import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import write_manifest
from spoofsense.errors import (
    DimMismatch,
    DuplicateUttId,
    EmptyCategory,
    MissingEmbedding,
    MissingMimickedTarget,
    ParseError,
    ZeroVector,
)
from spoofsense.trials import (
    CATEGORIES,
    Embeddings,
    Manifest,
    ManifestRow,
    build_all_pairs,
    build_pairs,
    cosine_score,
    load_embeddings,
    load_manifest,
    load_trials,
    sample_pairs,
    save_embeddings,
    save_manifest,
    save_trials,
    score_trials,
)


def enumerate_category(rows, category):
    """Dumb reference: test every unordered pair against the definition."""
    out = set()
    for a, b in itertools.combinations(sorted(rows, key=lambda r: r.utt_id), 2):
        if category == "R":
            ok = a.role == b.role == "target-real" and a.speaker_id == b.speaker_id
        elif category == "RI":
            ok = a.role == b.role == "target-real" and a.speaker_id != b.speaker_id
        elif category == "IAB":
            ok = (
                a.role == b.role == "impersonation"
                and a.speaker_id == b.speaker_id
                and a.mimicked_target_id != b.mimicked_target_id
            )
        elif category == "TI":
            ok = {a.role, b.role} == {"target-real", "impersonation"} and (
                (a.role == "target-real" and b.mimicked_target_id == a.speaker_id)
                or (b.role == "target-real" and a.mimicked_target_id == b.speaker_id)
            )
        elif category == "IRAB":
            ok = a.role == b.role == "impersonator-real" and a.speaker_id != b.speaker_id
        elif category == "IRT":
            ok = {a.role, b.role} == {"impersonator-real", "target-real"}
        if ok:
            out.add((a.utt_id, b.utt_id))
    return out


def random_manifest(seed):
    rng = np.random.default_rng(seed)
    rows = []
    n_targets = rng.integers(1, 5)
    n_imps = rng.integers(1, 4)
    for t in range(n_targets):
        for u in range(rng.integers(1, 4)):
            rows.append(ManifestRow("T%dr%d" % (t, u), "T%d" % t, "target-real", "x.wav"))
    for i in range(n_imps):
        for u in range(rng.integers(0, 3)):
            rows.append(ManifestRow("I%dr%d" % (i, u), "I%d" % i, "impersonator-real", "x.wav"))
        for u in range(rng.integers(0, 4)):
            target = "T%d" % rng.integers(0, n_targets)
            rows.append(
                ManifestRow("I%dm%d" % (i, u), "I%d" % i, "impersonation", "x.wav",
                            mimicked_target_id=target)
            )
    return Manifest(rows=rows)


@pytest.mark.parametrize("seed", range(20))
def test_categories_match_enumerator(seed):
    m = random_manifest(seed)
    for cat in CATEGORIES:
        expect = enumerate_category(m.rows, cat)
        try:
            ts = build_pairs(m, cat)
        except EmptyCategory:
            assert expect == set()
            continue
        got = {(p.utt_a, p.utt_b) for p in ts.pairs}
        assert got == expect
        want_label = "positive" if cat in ("R", "IAB") else "negative"
        assert all(p.label == want_label and p.category == cat for p in ts.pairs)
        assert all(p.utt_a < p.utt_b for p in ts.pairs)  # no self/dup pairs


def test_spec_counts():
    rows = [
        ManifestRow("%sr%d" % (s, i), s, "target-real", "x.wav")
        for s in ("X", "Y")
        for i in range(3)
    ]
    m = Manifest(rows=rows)
    assert len(build_pairs(m, "R")) == 6   # 2 * C(3,2)
    assert len(build_pairs(m, "RI")) == 9  # 3 * 3

    imp = [
        ManifestRow("i%s%d" % (t, k), "I1", "impersonation", "x.wav", mimicked_target_id=t)
        for t in ("X", "Y")
        for k in range(2)
    ]
    m2 = Manifest(rows=rows + imp)
    assert len(build_pairs(m2, "IAB")) == 4  # 2 * 2 cross-target


def test_all_pairs_concatenates_nonempty():
    rows = [ManifestRow("a", "S", "target-real", "x"), ManifestRow("b", "S", "target-real", "x")]
    m = Manifest(rows=rows)
    ts = build_all_pairs(m)  # only R qualifies; the rest are empty
    assert len(ts) == 1 and ts.pairs[0].category == "R"
    with pytest.raises(EmptyCategory):
        build_all_pairs(Manifest(rows=[ManifestRow("a", "S", "bonafide", "x")]))


def test_sampling_deterministic_subset():
    m = random_manifest(3)
    ts = build_all_pairs(m)
    s1 = sample_pairs(ts, 5, seed=11)
    s2 = sample_pairs(ts, 5, seed=11)
    assert s1.pairs == s2.pairs and len(s1) == 5
    assert set(s1.pairs) <= set(ts.pairs)
    assert sample_pairs(ts, 10**6, seed=0) is ts


def test_manifest_roundtrip(tmp_path):
    m = random_manifest(1)
    save_manifest(tmp_path / "m.tsv", m)
    assert load_manifest(tmp_path / "m.tsv").rows == m.rows


def test_trials_roundtrip(tmp_path):
    ts = build_all_pairs(random_manifest(2))
    save_trials(tmp_path / "t.tsv", ts)
    assert load_trials(tmp_path / "t.tsv").pairs == ts.pairs


@pytest.mark.parametrize(
    "rows, exc",
    [
        ([("u1", "s", "target-real", "-", "-", "x"), ("u1", "s", "target-real", "-", "-", "y")], DuplicateUttId),
        ([("u1", "s", "impersonation", "-", "-", "x")], MissingMimickedTarget),
        ([("u1", "s", "target-real", "T9", "-", "x")], ParseError),  # mimicked on wrong role
        ([("u1", "s", "alien", "-", "-", "x")], ParseError),
    ],
)
def test_manifest_errors(tmp_path, rows, exc):
    write_manifest(tmp_path / "m.tsv", rows)
    with pytest.raises(exc):
        load_manifest(tmp_path / "m.tsv")


def test_manifest_header_errors(tmp_path):
    p = tmp_path / "m.tsv"
    p.write_text("utt_id\tspeaker_id\trole\tbogus\tpath\nu\ts\tbonafide\t-\tx\n")
    with pytest.raises(ParseError) as e:
        load_manifest(p)
    assert e.value.line == 1
    p.write_text("utt_id\tspeaker_id\trole\npartial\trow\n")
    with pytest.raises(ParseError):
        load_manifest(p)
    p.write_text("utt_id\tspeaker_id\trole\tpath\nu\ts\tbonafide\n")
    with pytest.raises(ParseError) as e:
        load_manifest(p)
    assert e.value.line == 2


def test_cosine_examples():
    assert cosine_score([1, 2, 2], [2, 1, 2]) == 8 / 9
    assert cosine_score([1, 0], [0, 1]) == 0.0
    assert cosine_score([3, 0], [-2, 0]) == -1.0
    # norms of [1,1] round, so only near-exact opposition is guaranteed here
    assert abs(cosine_score([1, 1], [-1, -1]) + 1.0) < 1e-15
    with pytest.raises(ZeroVector):
        cosine_score([0, 0], [1, 1])
    with pytest.raises(DimMismatch):
        cosine_score([1, 2], [1, 2, 3])


@given(
    a=st.lists(st.floats(-10, 10), min_size=2, max_size=8),
    alpha=st.floats(0.001, 1000),
    beta=st.floats(0.001, 1000),
)
@settings(max_examples=60, deadline=None)
def test_cosine_scale_invariance(a, alpha, beta):
    a = np.array(a)
    b = a[::-1] + 0.5
    if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0:
        return
    base = cosine_score(a, b)
    assert abs(cosine_score(alpha * a, beta * b) - base) < 1e-12


def test_embeddings_roundtrip_and_errors(tmp_path):
    emb = Embeddings(dim=3, vectors={"u1": np.array([1.0, 2.0, 3.0]), "u2": np.array([0.5, -1.0, 2.5])})
    save_embeddings(tmp_path / "e.txt", emb)
    back = load_embeddings(tmp_path / "e.txt")
    assert back.dim == 3
    for k in emb.vectors:
        np.testing.assert_array_equal(back.vectors[k], emb.vectors[k])

    p = tmp_path / "bad.txt"
    p.write_text("u1\t1 2 3\n")  # no dim header
    with pytest.raises(ParseError):
        load_embeddings(p)
    p.write_text("dim=3\nu1\t1 2\n")
    with pytest.raises(ParseError) as e:
        load_embeddings(p)
    assert e.value.line == 2
    p.write_text("dim=3\nu1\t1 2 3\nu1\t4 5 6\n")
    with pytest.raises(DuplicateUttId):
        load_embeddings(p)
    p.write_text("dim=3\nu1\t1 2 nan\n")
    with pytest.raises(ParseError):
        load_embeddings(p)


def test_score_trials_groups_and_labels():
    rows = [
        ManifestRow("t1", "T", "target-real", "x"),
        ManifestRow("t2", "T", "target-real", "x"),
        ManifestRow("i1", "I", "impersonation", "x", mimicked_target_id="T"),
    ]
    m = Manifest(rows=rows)
    ts = build_all_pairs(m)  # R pair (t1,t2) + TI pairs (t1,i1), (t2,i1)
    emb = Embeddings(
        dim=2,
        vectors={"t1": np.array([1.0, 0.0]), "t2": np.array([0.9, 0.1]), "i1": np.array([0.0, 1.0])},
    )
    scored = score_trials(ts, emb)
    by_id = {t.trial_id: t for t in scored}
    assert by_id["t1:t2"].label == "target" and by_id["t1:t2"].group == "-"
    assert by_id["i1:t1"].label == "nontarget" and by_id["i1:t1"].group == "TI"
    with pytest.raises(MissingEmbedding):
        score_trials(ts, Embeddings(dim=2, vectors={"t1": np.array([1.0, 0.0])}))
