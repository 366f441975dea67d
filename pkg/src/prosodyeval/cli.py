"""Command-line interface and report emission.

Subcommands: ``extract`` (per-utterance feature CSVs), ``events``
(per-utterance binary event CSVs), ``evaluate`` (candidate vs human
references -> report.json / report.csv / radar.csv), ``self-validate``
(leave-one-out over the human speakers), ``perception`` (MOS, humanness,
win matrix, Bradley-Terry, t-tests from ratings/pairs CSVs), and ``report``
(re-project an existing report.json to CSV).

Exit codes: 0 success, 1 fatal error, 2 partial failure (some utterances
skipped).  The JSON report is authoritative; CSVs are flat projections
where None becomes an empty cell.  Set ``PROSODY_EVAL_LOG`` to control log
verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .binary import minmax_normalize
from .corpus import Corpus, load_corpus
from .events import DURATION_TIER_MODES, PeakConfig
from .features import (
    AnalysisConfig,
    feature_csv_path,
    read_feature_csv,
    write_feature_csv,
)
from .normalize import znorm
from .perception import (
    fit_btm,
    humanness_proportion,
    mos_summary,
    read_pairs_csv,
    read_ratings_csv,
    welch_t_test,
)
from .pipeline import (
    EVAL_FEATURES,
    CandidateEvaluation,
    EvalConfig,
    FeatureCorpus,
    build_feature_corpus,
    evaluate_candidate,
    evaluation_from_dict,
    evaluation_to_dict,
    self_validate,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

REPORT_CSV_HEADER = (
    "speaker",
    "feature",
    "zero_one_loss",
    "smoothed_loss",
    "recall",
    "precision",
    "f1",
    "error",
)

RADAR_CSV_HEADER = ("feature", "speaker", "f1_minmax", "one_minus_error")


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _report_csv_text(evaluations: list[CandidateEvaluation]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER)
    for ev in evaluations:
        for r in ev.reports:
            writer.writerow(
                [
                    r.speaker_id,
                    r.feature,
                    _fmt(r.zero_one_loss),
                    _fmt(r.smoothed_loss),
                    _fmt(r.recall),
                    _fmt(r.precision),
                    _fmt(r.f1),
                    _fmt(r.normalized_error),
                ]
            )
    return buffer.getvalue()


def _radar_csv_text(evaluations: list[CandidateEvaluation]) -> str:
    """Plot-ready series: min-max normalized F1 plus clamped 1 - error."""
    by_feature: dict[str, list] = {}
    for ev in evaluations:
        for r in ev.reports:
            by_feature.setdefault(r.feature, []).append(r)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RADAR_CSV_HEADER)
    for feature, reports in by_feature.items():
        f1_values = [r.f1 for r in reports]
        present = [v for v in f1_values if v is not None]
        if len(present) >= 2:
            f1_scaled = minmax_normalize(f1_values)
        else:
            f1_scaled = [None if v is None else 0.5 for v in f1_values]
        for r, f1_norm in zip(reports, f1_scaled):
            if r.normalized_error is None:
                complement = None
            else:
                complement = min(1.0, max(0.0, 1.0 - r.normalized_error))
            writer.writerow([feature, r.speaker_id, _fmt(f1_norm), _fmt(complement)])
    return buffer.getvalue()


def _write_reports(out_dir: Path, payload: dict, evaluations: list[CandidateEvaluation]) -> None:
    _write_json(out_dir / "report.json", payload)
    (out_dir / "report.csv").write_text(_report_csv_text(evaluations), encoding="utf-8")
    (out_dir / "radar.csv").write_text(_radar_csv_text(evaluations), encoding="utf-8")


# ---------------------------------------------------------------------------
# Shared option plumbing
# ---------------------------------------------------------------------------


def _add_corpus_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="corpus manifest JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for extraction")
    parser.add_argument(
        "--min-silence-ms",
        type=float,
        default=0.0,
        help="drop aligner silences shorter than this many milliseconds",
    )


def _add_eval_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threshold", type=float, default=0.5, help="majority agreement cut")
    parser.add_argument("--window", type=int, default=7, help="median window, in words")
    parser.add_argument(
        "--rho-mult", type=float, default=0.5, help="threshold shift as a fraction of std"
    )
    parser.add_argument(
        "--min-pause-ms", type=float, default=50.0, help="minimum pause to count as an event"
    )
    parser.add_argument(
        "--duration-tier",
        choices=DURATION_TIER_MODES,
        default="or_combined",
        help="how duration-peak and pause events combine",
    )
    parser.add_argument(
        "--features",
        default=",".join(EVAL_FEATURES),
        help="comma-separated subset of: " + ", ".join(EVAL_FEATURES),
    )
    parser.add_argument(
        "--pooled",
        action="store_true",
        help="pool words corpus-wide instead of averaging per-sentence metrics",
    )
    parser.add_argument(
        "--weight-by-words",
        action="store_true",
        help="weight per-sentence metrics by word count",
    )
    parser.add_argument(
        "--features-dir",
        default=None,
        help="directory of previously extracted feature CSVs",
    )
    parser.add_argument(
        "--from-audio",
        action="store_true",
        help="compute features from audio instead of reading feature CSVs",
    )


def _eval_config(args) -> EvalConfig:
    if args.pooled and args.weight_by_words:
        raise ValueError("--pooled and --weight-by-words are mutually exclusive")
    aggregation = "sentence_mean"
    if args.pooled:
        aggregation = "pooled"
    elif args.weight_by_words:
        aggregation = "weight_by_words"
    return EvalConfig(
        threshold=args.threshold,
        peak=PeakConfig(window_words=args.window, rho_multiplier=args.rho_mult),
        min_pause_ms=args.min_pause_ms,
        duration_tier=args.duration_tier,
        features=tuple(f.strip() for f in args.features.split(",") if f.strip()),
        aggregation=aggregation,
    )


def _load_feature_corpus(args, corpus: Corpus) -> tuple[FeatureCorpus, int]:
    """Feature matrices from CSVs or audio; returns (corpus, exit code so far)."""
    kinds = {entry.speaker_id: entry.kind for entry in corpus.manifest.speakers}
    if args.features_dir and args.from_audio:
        raise ValueError("--features-dir and --from-audio are mutually exclusive")
    if not args.features_dir and not args.from_audio:
        raise ValueError("need features: pass --features-dir DIR or --from-audio")
    if args.from_audio:
        fc = build_feature_corpus(corpus, AnalysisConfig(), jobs=args.jobs)
        return fc, EXIT_PARTIAL if fc.failed else EXIT_OK
    feature_dir = Path(args.features_dir)
    matrices = {}
    failed = {}
    for (speaker, sentence) in sorted(corpus.alignments):
        path = feature_csv_path(feature_dir, speaker, sentence)
        try:
            matrices[(speaker, sentence)] = read_feature_csv(
                path.read_text(encoding="utf-8"), speaker, sentence
            )
        except (OSError, ValueError) as exc:
            logger.warning("skipping feature file %s: %s", path, exc)
            failed[(speaker, sentence)] = str(exc)
    fc = FeatureCorpus(kinds, matrices, failed)
    return fc, EXIT_PARTIAL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_extract(args) -> int:
    corpus = load_corpus(args.manifest, min_silence_s=args.min_silence_ms / 1000.0)
    fc = build_feature_corpus(corpus, AnalysisConfig(), jobs=args.jobs)
    out_dir = Path(args.out) / "features"
    out_dir.mkdir(parents=True, exist_ok=True)
    for (speaker, sentence), matrix in sorted(fc.matrices.items()):
        if args.normalized:
            matrix = znorm(matrix)
        path = feature_csv_path(out_dir, speaker, sentence)
        path.write_text(write_feature_csv(matrix), encoding="utf-8")
    for (speaker, sentence), reason in sorted(fc.failed.items()):
        print(
            f"warning: skipped ({speaker}, {sentence}): {reason}",
            file=sys.stderr,
        )
    if not fc.matrices:
        print("error: no utterance could be processed", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_PARTIAL if fc.failed else EXIT_OK


def cmd_events(args) -> int:
    corpus = load_corpus(args.manifest, min_silence_s=args.min_silence_ms / 1000.0)
    cfg = _eval_config(args)
    fc, status = _load_feature_corpus(args, corpus)
    out_dir = Path(args.out) / "events"
    out_dir.mkdir(parents=True, exist_ok=True)
    from .pipeline import _feature_events  # single-purpose: reuse the tier wiring

    for (speaker, sentence), matrix in sorted(fc.matrices.items()):
        scored = znorm(matrix) if cfg.use_normalized else matrix
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("word", "feature", "event"))
        for feature in cfg.features:
            bits = _feature_events(scored, matrix, feature, cfg)
            for i, bit in enumerate(bits):
                writer.writerow((i, feature, int(bit)))
        path = out_dir / f"{speaker}__{sentence}.events.csv"
        path.write_text(buffer.getvalue(), encoding="utf-8")
    return status


def _run_config_payload(args, cfg: EvalConfig) -> dict:
    return {
        "threshold": cfg.threshold,
        "window_words": cfg.peak.window_words,
        "rho_multiplier": cfg.peak.rho_multiplier,
        "endpoint_policy": cfg.peak.endpoint_policy,
        "min_pause_ms": cfg.min_pause_ms,
        "duration_tier": cfg.duration_tier,
        "features": list(cfg.features),
        "aggregation": cfg.aggregation,
        "use_normalized": cfg.use_normalized,
        "manifest": str(args.manifest),
    }


def cmd_evaluate(args) -> int:
    corpus = load_corpus(args.manifest, min_silence_s=args.min_silence_ms / 1000.0)
    cfg = _eval_config(args)
    known = {entry.speaker_id for entry in corpus.manifest.speakers}
    if args.candidate not in known:
        print(f"error: candidate {args.candidate!r} is not in the manifest", file=sys.stderr)
        return EXIT_FATAL
    fc, status = _load_feature_corpus(args, corpus)
    evaluation = evaluate_candidate(fc, args.candidate, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": _run_config_payload(args, cfg),
        "evaluations": [evaluation_to_dict(evaluation)],
    }
    _write_reports(out_dir, payload, [evaluation])
    return status


def cmd_self_validate(args) -> int:
    corpus = load_corpus(args.manifest, min_silence_s=args.min_silence_ms / 1000.0)
    cfg = _eval_config(args)
    fc, status = _load_feature_corpus(args, corpus)
    evaluations = self_validate(fc, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": _run_config_payload(args, cfg),
        "evaluations": [evaluation_to_dict(ev) for ev in evaluations],
    }
    _write_reports(out_dir, payload, evaluations)
    return status


def cmd_perception(args) -> int:
    ratings = read_ratings_csv(Path(args.ratings).read_text(encoding="utf-8"))
    pairs = read_pairs_csv(Path(args.pairs).read_text(encoding="utf-8"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    humanness = humanness_proportion(ratings)
    _write_json(
        out_dir / "table1.json",
        [
            {"speaker": speaker, "proportion": proportion}
            for speaker, proportion in sorted(
                humanness.items(), key=lambda item: -item[1]
            )
        ],
    )
    mos = mos_summary(ratings)
    _write_json(
        out_dir / "table2.json",
        [
            {"speaker": speaker, "mos": summary.mean, "stderr": summary.stderr, "n": summary.n}
            for speaker, summary in sorted(mos.items(), key=lambda item: -item[1].mean)
        ],
    )
    btm = fit_btm(pairs)
    _write_json(
        out_dir / "table4.json",
        {
            "scores": [
                {"speaker": speaker, "score": score}
                for speaker, score in sorted(btm.scores.items(), key=lambda item: -item[1])
            ],
            "converged": btm.converged,
            "iterations": btm.iterations,
        },
    )

    if args.manifest:
        corpus = load_corpus(args.manifest)
        humans = set(corpus.human_ids)
        synthetic = set(corpus.synthetic_ids)
        rows = []
        for measure, value_of in (
            ("mos", lambda r: float(r.mos)),
            ("humanness", lambda r: float(r.judged_human)),
        ):
            sample_h = [value_of(r) for r in ratings if r.speaker_id in humans]
            sample_s = [value_of(r) for r in ratings if r.speaker_id in synthetic]
            if len(sample_h) >= 2 and len(sample_s) >= 2:
                result = welch_t_test(sample_s, sample_h)
                rows.append(
                    {
                        "measure": measure,
                        "a": "synthetic",
                        "b": "human",
                        "t": result.t,
                        "df": result.df,
                        "p": result.p,
                        "winner": "human" if result.t < 0 else "synthetic",
                    }
                )
        by_mos = {speaker: summary.mean for speaker, summary in mos.items()}
        rated_humans = sorted(h for h in humans if h in by_mos)
        rated_synth = sorted(s for s in synthetic if s in by_mos)
        if rated_humans and rated_synth:
            worst_human = min(rated_humans, key=lambda s: by_mos[s])
            best_model = max(rated_synth, key=lambda s: by_mos[s])
            sample_h = [float(r.mos) for r in ratings if r.speaker_id == worst_human]
            sample_s = [float(r.mos) for r in ratings if r.speaker_id == best_model]
            if len(sample_h) >= 2 and len(sample_s) >= 2:
                result = welch_t_test(sample_s, sample_h)
                rows.append(
                    {
                        "measure": "mos",
                        "a": best_model,
                        "b": worst_human,
                        "t": result.t,
                        "df": result.df,
                        "p": result.p,
                        "winner": worst_human if result.t < 0 else best_model,
                    }
                )
        _write_json(out_dir / "ttest.json", rows)
    else:
        logger.warning("no --manifest given; skipping group t-tests (ttest.json)")
    return EXIT_OK


def cmd_report(args) -> int:
    doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    evaluations = [evaluation_from_dict(d) for d in doc["evaluations"]]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(_report_csv_text(evaluations), encoding="utf-8")
    (out_dir / "radar.csv").write_text(_radar_csv_text(evaluations), encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prosodyeval",
        description="Two-tier prosody evaluation against a human reference corpus",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="write per-utterance word feature CSVs")
    _add_corpus_options(p)
    p.add_argument("--normalized", action="store_true", help="emit z-normalized values")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("events", help="write per-utterance binary event CSVs")
    _add_corpus_options(p)
    _add_eval_options(p)
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("evaluate", help="score one candidate against the human references")
    _add_corpus_options(p)
    _add_eval_options(p)
    p.add_argument("--candidate", required=True, help="speaker id to evaluate")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("self-validate", help="leave-one-out evaluation of the human speakers")
    _add_corpus_options(p)
    _add_eval_options(p)
    p.set_defaults(func=cmd_self_validate)

    p = sub.add_parser("perception", help="summaries and tests over perceptual data")
    p.add_argument("--ratings", required=True, help="ratings CSV (listener,speaker,sentence,mos,judged_human)")
    p.add_argument("--pairs", required=True, help="pairs CSV (listener,sentence,speaker_a,speaker_b,winner)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--manifest", default=None, help="manifest for the human/synthetic split")
    p.set_defaults(func=cmd_perception)

    p = sub.add_parser("report", help="re-project a report.json to report.csv / radar.csv")
    p.add_argument("--report", required=True, help="existing report.json")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("PROSODY_EVAL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_FATAL if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary: report, don't crash
        logger.debug("fatal error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
