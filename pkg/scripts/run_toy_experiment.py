#!/usr/bin/env python3
"""End-to-end toy experiment on synthesized audio.

Builds a small corpus (natural-like voices vs stationary machine tones),
then drives the real CLI in-process through the whole pipeline:

    extract -> train-cm -> score-cm -> eval (EER, then min t-DCF)
    pairs -> score-asv -> eval (per-category ASV report)
    pse-report

Everything lands under --out, so the finished directory doubles as a
worked example of every file format the tools read and write.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from spoofsense.audio import AudioBuffer, write_wav
from spoofsense.cli import main as cli

SR = 16000
REPO = Path(__file__).resolve().parents[1]


def natural(f0_base, seed, dur=1.1):
    """Voice-like: vibrato, slow random drift, a touch of noise."""
    r = np.random.default_rng(seed)
    t = np.arange(int(dur * SR)) / SR
    drift = np.cumsum(r.normal(size=len(t))) / np.sqrt(len(t))
    f0 = f0_base * (1 + 0.03 * np.sin(2 * np.pi * 5.0 * t) + 0.02 * drift)
    phase = 2 * np.pi * np.cumsum(f0) / SR
    x = 0.5 * np.sin(phase) + 0.15 * np.sin(2 * phase) + 0.01 * r.normal(size=len(t))
    return AudioBuffer(np.clip(x, -1, 1), SR)


def machine(f0_base, dur=1.1):
    """Perfectly stationary two-harmonic tone."""
    t = np.arange(int(dur * SR)) / SR
    x = 0.5 * np.sin(2 * np.pi * f0_base * t) + 0.15 * np.sin(2 * np.pi * 2 * f0_base * t)
    return AudioBuffer(x, SR)


def run(*argv):
    argv = [str(a) for a in argv]
    code = cli(argv)
    if code != 0:
        sys.exit("command failed (%d): spoofsense %s" % (code, " ".join(argv)))


def banner(text):
    print("\n=== %s ===" % text)


def build_cm_corpus(out, rng):
    audio = out / "audio"
    audio.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(8):
        u = "bona%02d" % i
        write_wav(audio / (u + ".wav"), natural(105 + 12 * i, seed=100 + i))
        rows.append((u, "spk%d" % (i % 4), "bonafide", "-", "-", audio / (u + ".wav")))
    for i in range(8):
        u = "spoof%02d" % i
        write_wav(audio / (u + ".wav"), machine(110 + 12 * i))
        attack = "A0%d" % (1 + i % 2)
        rows.append((u, "spk%d" % (i % 4), "spoof", "-", attack, audio / (u + ".wav")))
    path = out / "cm.tsv"
    with open(path, "w") as fh:
        fh.write("utt_id\tspeaker_id\trole\tmimicked_target_id\tattack_id\tpath\n")
        for r in rows:
            fh.write("\t".join(str(v) for v in r) + "\n")
    return path


def build_asv_protocol(out, rng):
    """Target/impersonator manifest plus speaker-clustered embeddings."""
    rows = []
    for t in range(3):
        for u in range(2):
            rows.append(("T%d_u%d" % (t, u), "T%d" % t, "target-real", "-"))
    for i in range(2):
        rows.append(("I%d_self" % i, "I%d" % i, "impersonator-real", "-"))
        for k, tgt in enumerate(("T%d" % i, "T2")):
            rows.append(("I%d_as_%s" % (i, tgt), "I%d" % i, "impersonation", tgt))
    path = out / "asv.tsv"
    with open(path, "w") as fh:
        fh.write("utt_id\tspeaker_id\trole\tmimicked_target_id\tattack_id\tpath\n")
        for utt, spk, role, mim in rows:
            fh.write("%s\t%s\t%s\t%s\t-\tx.wav\n" % (utt, spk, role, mim))

    dim = 16
    centroid = {s: rng.normal(size=dim) for s in ("T0", "T1", "T2", "I0", "I1")}
    emb_path = out / "embeddings.txt"
    with open(emb_path, "w") as fh:
        fh.write("dim=%d\n" % dim)
        for utt, spk, role, mim in rows:
            v = centroid[spk] + 0.15 * rng.normal(size=dim)
            if role == "impersonation":  # a partly successful mimic
                v = 0.5 * (v + centroid[mim]) + 0.1 * rng.normal(size=dim)
            fh.write("%s\t%s\n" % (utt, " ".join("%.6g" % c for c in v)))
    return path, emb_path


def show(path, title, limit=12):
    print("--- %s (%s) ---" % (title, path.name))
    lines = path.read_text().splitlines()
    for line in lines[:limit]:
        print("   ", line)
    if len(lines) > limit:
        print("    ... (%d more lines)" % (len(lines) - limit))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="toy_run", help="work directory (default ./toy_run)")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    banner("synthesize corpus")
    cm_manifest = build_cm_corpus(out, rng)
    print("16 utterances (8 natural-like, 8 machine-like) ->", out / "audio")

    banner("extract features")
    feats = out / "feats"
    for feature in ("mfcc", "jitter-shimmer", "pse"):
        run("extract", "--manifest", cm_manifest, "--feature", feature,
            "--out-dir", feats, "--jobs", 2)

    banner("train countermeasure")
    model = out / "cm.mdl"
    run("train-cm", "--features", "jitter-shimmer,pse", "--manifest", cm_manifest,
        "--feature-dir", feats, "--out-model", model)

    banner("score countermeasure")
    scores = out / "cm.scores"
    run("score-cm", "--model", model, "--manifest", cm_manifest,
        "--features", "jitter-shimmer,pse", "--feature-dir", feats,
        "--out-scores", scores)
    show(scores, "per-utterance scores")

    banner("evaluate: EER per attack")
    report = out / "cm_eer.csv"
    run("eval", "--scores", scores, "--out", report)
    show(report, "EER report")

    banner("evaluate: min t-DCF per attack")
    report = out / "cm_tdcf.csv"
    run("eval", "--scores", scores, "--metric", "tdcf",
        "--cost-config", REPO / "configs" / "tdcf_example.conf", "--out", report)
    show(report, "t-DCF report")

    banner("speaker-verification trials")
    asv_manifest, embeddings = build_asv_protocol(out, rng)
    trials = out / "trials.tsv"
    run("pairs", "--manifest", asv_manifest, "--category", "all", "--out", trials)
    asv_scores = out / "asv.scores"
    run("score-asv", "--pairs", trials, "--embeddings", embeddings,
        "--out-scores", asv_scores)
    report = out / "asv_eer.csv"
    run("eval", "--scores", asv_scores, "--out", report)
    show(report, "per-category ASV report")

    banner("entropy report")
    pse_csv = out / "pse.csv"
    run("pse-report", "--manifest", cm_manifest, "--out", pse_csv)
    show(pse_csv, "per-utterance entropy", limit=20)

    banner("done")
    print("all artifacts under", out.resolve())


if __name__ == "__main__":
    main()
