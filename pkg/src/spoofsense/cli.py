"""Command-line pipeline: extract → pairs/train → score → eval.

Stages communicate through files only, so each command is independently
rerunnable and byte-deterministic given the same inputs, config, and seed.
Exit codes: 0 success, 1 data/runtime error, 2 usage error.
"""

import argparse
import concurrent.futures
import os
import sys

import numpy as np

from .audio import read_wav, resample
from .config import load_config
from .entropy import pse_report, utterance_pse
from .errors import (
    EmptyDataset,
    InputTooShort,
    MissingFeatureFile,
    SpoofsenseError,
)
from .f0 import estimate_f0
from .metrics import evaluate_scorefile, write_report
from .mlp import init_model, load_model, save_model, score, train
from .perturbation import utterance_perturbation
from .spectral import (
    FeatureMatrix,
    KIND_DIMS,
    band_aperiodicity,
    mfcc,
    spectral_envelope,
    stft_spectrogram,
)
from .store import read_feature, write_feature
from .trials import (
    build_all_pairs,
    build_pairs,
    load_embeddings,
    load_manifest,
    load_trials,
    sample_pairs,
    save_trials,
    score_trials,
    write_scorefile,
)

FEATURES = ("stft", "mfcc", "sp", "ap", "f0", "jitter-shimmer", "pse")
# single row per utterance; everything else is frame-level and mean-pooled
UTTERANCE_LEVEL = ("jitter-shimmer", "pse")

CLASS_OF_ROLE = {
    "bonafide": 0,
    "target-real": 0,
    "impersonator-real": 0,
    "spoof": 1,
    "impersonation": 1,
}
CLASS_NAMES = ("bonafide", "spoof")


def _load_audio(row, cfg):
    return resample(read_wav(row.path), cfg.sample_rate)


def compute_feature(buf, feature, cfg):
    if feature == "stft":
        return stft_spectrogram(buf, cfg.stft())
    if feature == "mfcc":
        return mfcc(buf, cfg.mfcc())
    if feature == "f0":
        contour = estimate_f0(buf, cfg.f0())
        return FeatureMatrix(
            kind="f0", data=contour.values[:, None], hop=contour.hop
        )
    if feature == "sp":
        return spectral_envelope(buf, estimate_f0(buf, cfg.f0()), cfg.envelope())
    if feature == "ap":
        return band_aperiodicity(buf, estimate_f0(buf, cfg.f0()), cfg.ap())
    if feature == "jitter-shimmer":
        p = utterance_perturbation(buf, cfg.f0())
        return FeatureMatrix(
            kind="jitter-shimmer",
            data=np.array([[p.jitter_local, p.shimmer_local]]),
            hop=0.0,
        )
    if feature == "pse":
        v = utterance_pse(buf, cfg.f0())
        return FeatureMatrix(kind="pse", data=np.array([[v]]), hop=0.0)
    raise ValueError("unknown feature %r" % feature)


def _feature_path(out_dir, utt_id, feature):
    return os.path.join(out_dir, "%s.%s.ssft" % (utt_id, feature))


def _extract_one(row, feature, cfg, out_dir):
    """Worker for one utterance; returns (utt_id, error message or None)."""
    try:
        m = compute_feature(_load_audio(row, cfg), feature, cfg)
        write_feature(_feature_path(out_dir, row.utt_id, feature), m)
        return row.utt_id, None
    except (SpoofsenseError, OSError, ValueError) as e:
        return row.utt_id, "%s: %s" % (type(e).__name__, e)


def cmd_extract(args):
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    os.makedirs(args.out_dir, exist_ok=True)

    rows = list(manifest.rows)
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(
                ex.map(_extract_one, rows, [args.feature] * len(rows),
                       [cfg] * len(rows), [args.out_dir] * len(rows))
            )
    else:
        results = [_extract_one(r, args.feature, cfg, args.out_dir) for r in rows]

    results.sort(key=lambda r: r[0])
    failures = [(utt, msg) for utt, msg in results if msg is not None]
    for utt, msg in failures:
        print("FAIL %s: %s" % (utt, msg), file=sys.stderr)
    print(
        "extract %s: %d ok, %d failed"
        % (args.feature, len(results) - len(failures), len(failures))
    )
    if failures and not args.keep_going:
        return 1
    return 0


def cmd_pairs(args):
    manifest = load_manifest(args.manifest)
    if args.category == "all":
        ts = build_all_pairs(manifest)
    else:
        ts = build_pairs(manifest, args.category)
    if args.sample is not None:
        ts = sample_pairs(ts, args.sample, seed=args.seed)
    save_trials(args.out, ts)
    print("pairs %s: %d trials" % (args.category, len(ts)))
    return 0


def _pooled_vector(utt_id, kinds, feature_dir):
    """Concatenate per-kind vectors; frame-level kinds are mean-pooled."""
    parts = []
    for kind in kinds:
        path = _feature_path(feature_dir, utt_id, kind)
        if not os.path.exists(path):
            raise MissingFeatureFile(path)
        m = read_feature(path)
        if m.num_frames == 0:
            raise InputTooShort("0-frame feature file %s" % path)
        parts.append(m.data[0] if kind in UTTERANCE_LEVEL else m.data.mean(axis=0))
    return np.concatenate(parts)


def _parse_kinds(parser, spec_str):
    kinds = [k.strip() for k in spec_str.split(",") if k.strip()]
    if not kinds:
        parser.error("--features must name at least one feature kind")
    for k in kinds:
        if k not in FEATURES:
            parser.error("unknown feature kind %r (choose from %s)" % (k, ", ".join(FEATURES)))
    return kinds


def _dataset(manifest, kinds, feature_dir):
    xs, ys = [], []
    for row in manifest.rows:
        xs.append(_pooled_vector(row.utt_id, kinds, feature_dir))
        ys.append(CLASS_OF_ROLE[row.role])
    return np.array(xs), np.array(ys)


def cmd_train_cm(args, parser):
    kinds = _parse_kinds(parser, args.features)
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    x, y = _dataset(manifest, kinds, args.feature_dir)
    if len(set(y.tolist())) < 2:
        raise EmptyDataset("training needs both bonafide and spoof rows")

    model = init_model(
        (x.shape[1], cfg.hidden1, cfg.hidden2, 2),
        activation=cfg.activation,
        seed=cfg.seed,
    )
    trained, history = train(model, x, y, cfg.train_config())
    save_model(args.out_model, trained)
    with open(args.out_model + ".losses.txt", "w") as fh:
        for loss in history:
            fh.write("%.12g\n" % loss)
    print(
        "train-cm: %d utts, dims %s, final loss %.6g"
        % (len(y), "x".join(str(d) for d in trained.dims), history[-1])
    )
    return 0


def cmd_score_cm(args, parser):
    kinds = _parse_kinds(parser, args.features)
    model = load_model(args.model)
    manifest = load_manifest(args.manifest)
    with open(args.out_scores, "w") as fh:
        for row in manifest.rows:
            x = _pooled_vector(row.utt_id, kinds, args.feature_dir)
            s = score(model, x)
            fh.write(
                "%s\t%s\t%s\t%.12g\n"
                % (row.utt_id, row.attack_id or "-", CLASS_NAMES[CLASS_OF_ROLE[row.role]], s)
            )
    print("score-cm: %d utterances scored" % len(manifest))
    return 0


def cmd_score_asv(args):
    ts = load_trials(args.pairs)
    emb = load_embeddings(args.embeddings)
    scored = score_trials(ts, emb)
    write_scorefile(args.out_scores, scored)
    print("score-asv: %d trials scored" % len(scored))
    return 0


def cmd_eval(args, parser):
    cost = None
    if args.metric == "tdcf":
        if args.cost_config is None:
            parser.error("--cost-config is required for --metric tdcf")
        cost = load_config(args.cost_config).cost_model()
    reports = evaluate_scorefile(args.scores, mode=args.metric, cost=cost)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_report(reports, fh)
    else:
        write_report(reports, sys.stdout)
    return 0


def cmd_pse_report(args):
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    summary = pse_report(
        manifest, args.out, cfg.f0(), reader=lambda row: _load_audio(row, cfg)
    )
    print(
        "pse-report: %d ok, %d errors" % (len(summary.per_utt), len(summary.errors))
    )
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="spoofsense",
        description="Speech anti-spoofing feature extraction and evaluation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract", help="extract one feature kind over a manifest")
    ext.add_argument("--manifest", required=True)
    ext.add_argument("--feature", required=True, choices=FEATURES)
    ext.add_argument("--out-dir", required=True)
    ext.add_argument("--config", default=None)
    ext.add_argument("--jobs", type=int, default=1)
    ext.add_argument("--keep-going", action="store_true",
                     help="log per-utterance failures but exit 0")

    pr = sub.add_parser("pairs", help="build speaker trial pairs from a manifest")
    pr.add_argument("--manifest", required=True)
    pr.add_argument("--category", required=True,
                    choices=("R", "RI", "IAB", "TI", "IRAB", "IRT", "all"))
    pr.add_argument("--out", required=True)
    pr.add_argument("--sample", type=int, default=None)
    pr.add_argument("--seed", type=int, default=0)

    tr = sub.add_parser("train-cm", help="train the countermeasure MLP")
    tr.add_argument("--features", required=True,
                    help="comma-separated feature kinds, e.g. jitter-shimmer,pse")
    tr.add_argument("--manifest", required=True)
    tr.add_argument("--feature-dir", required=True)
    tr.add_argument("--out-model", required=True)
    tr.add_argument("--config", default=None)

    sc = sub.add_parser("score-cm", help="score utterances with a trained model")
    sc.add_argument("--model", required=True)
    sc.add_argument("--manifest", required=True)
    sc.add_argument("--features", required=True)
    sc.add_argument("--feature-dir", required=True)
    sc.add_argument("--out-scores", required=True)

    sa = sub.add_parser("score-asv", help="cosine-score trial pairs from embeddings")
    sa.add_argument("--pairs", required=True)
    sa.add_argument("--embeddings", required=True)
    sa.add_argument("--out-scores", required=True)

    ev = sub.add_parser("eval", help="EER / min t-DCF report over a score file")
    ev.add_argument("--scores", required=True)
    ev.add_argument("--metric", default="eer", choices=("eer", "tdcf"))
    ev.add_argument("--cost-config", default=None)
    ev.add_argument("--out", default=None)

    ps = sub.add_parser("pse-report", help="entropy distribution report")
    ps.add_argument("--manifest", required=True)
    ps.add_argument("--out", required=True)
    ps.add_argument("--config", default=None)

    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "extract":
            return cmd_extract(args)
        if args.command == "pairs":
            return cmd_pairs(args)
        if args.command == "train-cm":
            return cmd_train_cm(args, parser)
        if args.command == "score-cm":
            return cmd_score_cm(args, parser)
        if args.command == "score-asv":
            return cmd_score_asv(args)
        if args.command == "eval":
            return cmd_eval(args, parser)
        if args.command == "pse-report":
            return cmd_pse_report(args)
        parser.error("unknown command %r" % args.command)
    except SystemExit as e:  # parser.error inside a command handler
        return int(e.code or 0)
    except (SpoofsenseError, OSError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
