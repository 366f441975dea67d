"""End-to-end evaluation: features -> normalization -> events -> both metric tiers.

A FeatureCorpus (word feature matrices keyed by speaker and sentence, plus
speaker kinds) is evaluated one candidate at a time against the human
reference speakers.  Each feature yields one TierReport combining the
binary-event metrics and the continuous normalized error, aggregated over
sentences; per-sentence scores are kept for diagnostics and group t-tests.
Leave-one-out self-validation reuses the same machinery with each human as
the candidate and the remaining humans as references.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import binary
from .binary import BinaryScore
from .continuous import build_reference
from .corpus import Corpus
from .events import (
    DEFAULT_MIN_PAUSE_MS,
    PeakConfig,
    combine_duration_tier,
    detect_peaks,
    pause_events_from_ms,
)
from .features import AnalysisConfig, WordFeatureMatrix, extract_features
from .normalize import znorm
from .perception import TTestResult, welch_t_test

logger = logging.getLogger(__name__)

#: Features evaluated by default, in report order.
EVAL_FEATURES = ("duration", "pitch", "intensity", "alpha_ratio", "l1_l0", "cpps")

FEATURE_TO_COLUMN = {
    "duration": "duration_ms",
    "pitch": "f0_hz",
    "intensity": "intensity_db",
    "alpha_ratio": "alpha_ratio_db",
    "l1_l0": "l1_l0_db",
    "cpps": "cpps_db",
}

AGGREGATION_MODES = ("sentence_mean", "weight_by_words", "pooled")

#: Metrics where a lower value is better (the rest are higher-better).
LOWER_IS_BETTER = frozenset({"zero_one_loss", "smoothed_loss", "normalized_error"})


@dataclass(frozen=True)
class EvalConfig:
    threshold: float = 0.5
    peak: PeakConfig = field(default_factory=PeakConfig)
    min_pause_ms: float = DEFAULT_MIN_PAUSE_MS
    duration_tier: str = "or_combined"
    features: tuple[str, ...] = EVAL_FEATURES
    aggregation: str = "sentence_mean"
    use_normalized: bool = True
    ddof: int = 0

    def __post_init__(self):
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0, 1]")
        if self.aggregation not in AGGREGATION_MODES:
            raise ValueError(f"aggregation must be one of {AGGREGATION_MODES}")
        unknown = set(self.features) - set(EVAL_FEATURES)
        if unknown:
            raise ValueError(f"unknown features: {sorted(unknown)}")


@dataclass(frozen=True)
class FeatureCorpus:
    """Word feature matrices for every loadable utterance, plus speaker kinds."""

    kinds: dict[str, str]
    matrices: dict[tuple[str, str], WordFeatureMatrix]
    failed: dict[tuple[str, str], str] = field(default_factory=dict)

    @property
    def human_ids(self) -> tuple[str, ...]:
        return tuple(sorted(s for s, kind in self.kinds.items() if kind == "human"))

    @property
    def synthetic_ids(self) -> tuple[str, ...]:
        return tuple(sorted(s for s, kind in self.kinds.items() if kind == "synthetic"))

    def sentences_for(self, speaker_id: str) -> tuple[str, ...]:
        return tuple(sorted(sid for (spk, sid) in self.matrices if spk == speaker_id))


@dataclass(frozen=True)
class SentenceScores:
    speaker_id: str
    sentence_id: str
    feature: str
    binary: BinaryScore
    normalized_error: float | None
    n_words: int
    n_words_scored: int


@dataclass(frozen=True)
class TierReport:
    speaker_id: str
    feature: str
    zero_one_loss: float | None
    smoothed_loss: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    normalized_error: float | None
    n_sentences: int
    n_sentences_skipped: int
    n_words_scored: int


@dataclass(frozen=True)
class CandidateEvaluation:
    candidate_id: str
    reference_ids: tuple[str, ...]
    reports: tuple[TierReport, ...]
    sentences: tuple[SentenceScores, ...]


@dataclass(frozen=True)
class GroupComparison:
    feature: str
    metric: str
    t: float
    df: float
    p: float
    mean_a: float
    mean_b: float
    winner: str


# ---------------------------------------------------------------------------
# Feature corpus construction
# ---------------------------------------------------------------------------


def build_feature_corpus(
    corpus: Corpus, analysis: AnalysisConfig | None = None, *, jobs: int = 1
) -> FeatureCorpus:
    """Extract word features for every utterance in a loaded corpus.

    Utterances whose audio cannot be read or analyzed are skipped with a
    warning and recorded in ``failed`` so evaluation can count coverage.
    Extraction is pure per utterance, so ``jobs`` > 1 fans out across a
    thread pool; results are keyed, making the outcome order-independent.
    """
    analysis = analysis or AnalysisConfig()
    kinds = {entry.speaker_id: entry.kind for entry in corpus.manifest.speakers}
    keys = sorted(corpus.alignments)

    def one(key: tuple[str, str]):
        utt = corpus.utterance(*key, with_audio=True)
        return extract_features(utt, analysis)

    matrices: dict[tuple[str, str], WordFeatureMatrix] = {}
    failed: dict[tuple[str, str], str] = {}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {key: pool.submit(one, key) for key in keys}
        results = {key: future for key, future in futures.items()}
    else:
        results = None

    for key in keys:
        try:
            matrices[key] = results[key].result() if results is not None else one(key)
        except Exception as exc:  # noqa: BLE001 - skip-and-report contract
            logger.warning("skipping utterance %s: %s", key, exc)
            failed[key] = str(exc)
    return FeatureCorpus(kinds, matrices, failed)


def feature_corpus_from_matrices(
    kinds: dict[str, str], matrices: list[WordFeatureMatrix]
) -> FeatureCorpus:
    return FeatureCorpus(
        dict(kinds), {(m.speaker_id, m.sentence_id): m for m in matrices}
    )


# ---------------------------------------------------------------------------
# Candidate evaluation
# ---------------------------------------------------------------------------


def _feature_events(
    scored: WordFeatureMatrix, raw: WordFeatureMatrix, feature: str, cfg: EvalConfig
) -> np.ndarray:
    column = FEATURE_TO_COLUMN[feature]
    values, valid = scored.column(column)
    bits = detect_peaks(values, valid, cfg.peak).bits
    if feature == "duration":
        pause_bits = pause_events_from_ms(raw.values["pause_ms"], cfg.min_pause_ms)
        bits = combine_duration_tier(bits, pause_bits, cfg.duration_tier)
    return bits


@dataclass
class _SentenceInternals:
    """Word-level tallies needed for pooled aggregation."""

    alphas: np.ndarray
    hits: int
    n_pred: int
    n_majority: int
    sq_z_sum: float
    n_scored: int


def _score_sentence(
    candidate: WordFeatureMatrix,
    references: list[WordFeatureMatrix],
    raw_candidate: WordFeatureMatrix,
    raw_references: list[WordFeatureMatrix],
    feature: str,
    cfg: EvalConfig,
) -> tuple[SentenceScores, _SentenceInternals]:
    column = FEATURE_TO_COLUMN[feature]
    pred_bits = _feature_events(candidate, raw_candidate, feature, cfg)
    ref_bits = [
        _feature_events(ref, raw_ref, feature, cfg)
        for ref, raw_ref in zip(references, raw_references)
    ]

    alpha = binary.agreement(pred_bits, ref_bits)
    score = binary.score_events(pred_bits, ref_bits, cfg.threshold)
    hits = int(np.sum(pred_bits & (alpha.alpha >= cfg.threshold)))
    majority = int(np.sum(np.stack(ref_bits).mean(axis=0) >= cfg.threshold))

    ref_dist = build_reference(
        [ref.values[column] for ref in references],
        [ref.valid[column] for ref in references],
        ddof=cfg.ddof,
    )
    values, valid = candidate.column(column)
    sel = valid & np.isfinite(values) & ref_dist.scorable
    n_scored = int(sel.sum())
    if n_scored > 0:
        z = (values[sel] - ref_dist.mean[sel]) / ref_dist.std[sel]
        sq_z_sum = float(np.sum(z**2))
        error = sq_z_sum / n_scored
    else:
        sq_z_sum = 0.0
        error = None

    scores = SentenceScores(
        speaker_id=candidate.speaker_id,
        sentence_id=candidate.sentence_id,
        feature=feature,
        binary=score,
        normalized_error=error,
        n_words=candidate.n_words,
        n_words_scored=n_scored,
    )
    internals = _SentenceInternals(
        alphas=alpha.alpha,
        hits=hits,
        n_pred=int(np.sum(pred_bits)),
        n_majority=majority,
        sq_z_sum=sq_z_sum,
        n_scored=n_scored,
    )
    return scores, internals


def _mean_or_none(values: list[float | None], weights: list[int] | None = None) -> float | None:
    pairs = [
        (v, (weights[i] if weights is not None else 1))
        for i, v in enumerate(values)
        if v is not None
    ]
    if not pairs:
        return None
    total_weight = sum(w for _, w in pairs)
    return sum(v * w for v, w in pairs) / total_weight


def _aggregate_feature(
    candidate_id: str,
    feature: str,
    per_sentence: list[SentenceScores],
    internals: list[_SentenceInternals],
    n_skipped: int,
    cfg: EvalConfig,
) -> TierReport:
    n_words_scored = sum(i.n_scored for i in internals)
    if cfg.aggregation == "pooled":
        alphas = np.concatenate([i.alphas for i in internals])
        hits = sum(i.hits for i in internals)
        n_pred = sum(i.n_pred for i in internals)
        n_majority = sum(i.n_majority for i in internals)
        precision = hits / n_pred if n_pred > 0 else None
        recall = hits / n_majority if n_majority > 0 else None
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0:
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        sq_z = sum(i.sq_z_sum for i in internals)
        return TierReport(
            speaker_id=candidate_id,
            feature=feature,
            zero_one_loss=float(np.mean(alphas < cfg.threshold)),
            smoothed_loss=float(np.mean(binary.smoothed_correctness(alphas))),
            precision=precision,
            recall=recall,
            f1=f1,
            normalized_error=(sq_z / n_words_scored) if n_words_scored > 0 else None,
            n_sentences=len(per_sentence),
            n_sentences_skipped=n_skipped,
            n_words_scored=n_words_scored,
        )

    weights = None
    if cfg.aggregation == "weight_by_words":
        weights = [s.n_words for s in per_sentence]
    return TierReport(
        speaker_id=candidate_id,
        feature=feature,
        zero_one_loss=_mean_or_none([s.binary.zero_one_loss for s in per_sentence], weights),
        smoothed_loss=_mean_or_none([s.binary.smoothed_loss for s in per_sentence], weights),
        precision=_mean_or_none([s.binary.precision for s in per_sentence], weights),
        recall=_mean_or_none([s.binary.recall for s in per_sentence], weights),
        f1=_mean_or_none([s.binary.f1 for s in per_sentence], weights),
        normalized_error=_mean_or_none(
            [s.normalized_error for s in per_sentence], weights
        ),
        n_sentences=len(per_sentence),
        n_sentences_skipped=n_skipped,
        n_words_scored=n_words_scored,
    )


def evaluate_candidate(
    fc: FeatureCorpus,
    candidate_id: str,
    cfg: EvalConfig | None = None,
    *,
    reference_ids: tuple[str, ...] | None = None,
) -> CandidateEvaluation:
    """Score one candidate against the human reference speakers.

    References default to every human speaker except the candidate; passing
    a reference set that contains the candidate is rejected.  Sentences the
    candidate claims but whose features failed to extract are skipped and
    counted; sentences with fewer than two loaded references are an error.
    """
    cfg = cfg or EvalConfig()
    if candidate_id not in fc.kinds:
        raise ValueError(f"candidate {candidate_id!r} is not in the corpus")
    if reference_ids is None:
        reference_ids = tuple(h for h in fc.human_ids if h != candidate_id)
    if candidate_id in reference_ids:
        raise ValueError(
            f"candidate {candidate_id!r} must not appear in its own reference set"
        )
    if len(reference_ids) < 2:
        raise ValueError("need at least 2 reference speakers")

    candidate_sentences = fc.sentences_for(candidate_id)
    skipped = sorted(
        sid for (spk, sid) in fc.failed if spk == candidate_id
    )
    if not candidate_sentences and not skipped:
        raise ValueError(f"candidate {candidate_id!r} has no utterances")

    under_referenced = []
    plan: list[tuple[str, list[str]]] = []
    for sid in candidate_sentences:
        refs = [r for r in reference_ids if (r, sid) in fc.matrices]
        if len(refs) < 2:
            under_referenced.append(sid)
        else:
            plan.append((sid, refs))
    if under_referenced:
        raise ValueError(
            "sentences lack two loaded reference speakers: "
            + ", ".join(under_referenced)
        )

    per_feature_scores: dict[str, list[SentenceScores]] = {f: [] for f in cfg.features}
    per_feature_internals: dict[str, list[_SentenceInternals]] = {f: [] for f in cfg.features}
    for sid, refs in plan:
        raw_candidate = fc.matrices[(candidate_id, sid)]
        raw_references = [fc.matrices[(r, sid)] for r in refs]
        for ref in raw_references:
            if ref.n_words != raw_candidate.n_words:
                raise ValueError(
                    f"sentence {sid!r}: word counts differ between "
                    f"{candidate_id!r} ({raw_candidate.n_words}) and "
                    f"{ref.speaker_id!r} ({ref.n_words})"
                )
        if cfg.use_normalized:
            candidate = znorm(raw_candidate, ddof=cfg.ddof)
            references = [znorm(ref, ddof=cfg.ddof) for ref in raw_references]
        else:
            candidate, references = raw_candidate, raw_references
        for feature in cfg.features:
            scores, internals = _score_sentence(
                candidate, references, raw_candidate, raw_references, feature, cfg
            )
            per_feature_scores[feature].append(scores)
            per_feature_internals[feature].append(internals)

    reports = tuple(
        _aggregate_feature(
            candidate_id,
            feature,
            per_feature_scores[feature],
            per_feature_internals[feature],
            len(skipped),
            cfg,
        )
        for feature in cfg.features
    )
    sentences = tuple(
        s for feature in cfg.features for s in per_feature_scores[feature]
    )
    if skipped:
        logger.warning(
            "candidate %s: skipped %d sentence(s) with failed features: %s",
            candidate_id,
            len(skipped),
            ", ".join(skipped),
        )
    return CandidateEvaluation(candidate_id, tuple(reference_ids), reports, sentences)


def self_validate(fc: FeatureCorpus, cfg: EvalConfig | None = None) -> list[CandidateEvaluation]:
    """Leave-one-out evaluation of every human against the remaining humans."""
    humans = fc.human_ids
    if len(humans) < 3:
        raise ValueError(f"self-validation needs at least 3 human speakers, got {len(humans)}")
    return [
        evaluate_candidate(
            fc,
            human,
            cfg,
            reference_ids=tuple(h for h in humans if h != human),
        )
        for human in humans
    ]


# ---------------------------------------------------------------------------
# Group comparison (t-test table)
# ---------------------------------------------------------------------------


def _metric_value(scores: SentenceScores, metric: str) -> float | None:
    if metric == "normalized_error":
        return scores.normalized_error
    return getattr(scores.binary, metric)


def compare_groups(
    evals_a: list[CandidateEvaluation],
    evals_b: list[CandidateEvaluation],
    metrics: tuple[str, ...] = ("smoothed_loss", "f1", "normalized_error"),
    *,
    label_a: str = "a",
    label_b: str = "b",
    features: tuple[str, ...] | None = None,
) -> list[GroupComparison]:
    """Welch t-test per (feature, metric) between two groups of evaluations.

    Samples are the per-sentence metric values pooled over each group's
    speakers.  The winner is the group with the better mean: lower for
    losses and error, higher for precision/recall/F1; equal means tie.
    """
    if not evals_a or not evals_b:
        raise ValueError("both groups must be non-empty")
    if features is None:
        seen = {}
        for ev in evals_a:
            for report in ev.reports:
                seen.setdefault(report.feature, None)
        features = tuple(seen)

    rows = []
    for feature in features:
        for metric in metrics:
            sample_a = [
                v
                for ev in evals_a
                for s in ev.sentences
                if s.feature == feature and (v := _metric_value(s, metric)) is not None
            ]
            sample_b = [
                v
                for ev in evals_b
                for s in ev.sentences
                if s.feature == feature and (v := _metric_value(s, metric)) is not None
            ]
            result: TTestResult = welch_t_test(sample_a, sample_b)
            mean_a = float(np.mean(sample_a))
            mean_b = float(np.mean(sample_b))
            if mean_a == mean_b:
                winner = "tie"
            elif (mean_a < mean_b) == (metric in LOWER_IS_BETTER):
                winner = label_a
            else:
                winner = label_b
            rows.append(
                GroupComparison(feature, metric, result.t, result.df, result.p, mean_a, mean_b, winner)
            )
    return rows


# ---------------------------------------------------------------------------
# JSON-friendly (de)serialization
# ---------------------------------------------------------------------------


def evaluation_to_dict(ev: CandidateEvaluation) -> dict:
    return {
        "candidate": ev.candidate_id,
        "references": list(ev.reference_ids),
        "reports": [
            {
                "speaker": r.speaker_id,
                "feature": r.feature,
                "zero_one_loss": r.zero_one_loss,
                "smoothed_loss": r.smoothed_loss,
                "precision": r.precision,
                "recall": r.recall,
                "f1": r.f1,
                "normalized_error": r.normalized_error,
                "n_sentences": r.n_sentences,
                "n_sentences_skipped": r.n_sentences_skipped,
                "n_words_scored": r.n_words_scored,
            }
            for r in ev.reports
        ],
        "sentences": [
            {
                "speaker": s.speaker_id,
                "sentence": s.sentence_id,
                "feature": s.feature,
                "zero_one_loss": s.binary.zero_one_loss,
                "smoothed_loss": s.binary.smoothed_loss,
                "precision": s.binary.precision,
                "recall": s.binary.recall,
                "f1": s.binary.f1,
                "threshold": s.binary.threshold,
                "normalized_error": s.normalized_error,
                "n_words": s.n_words,
                "n_words_scored": s.n_words_scored,
            }
            for s in ev.sentences
        ],
    }


def evaluation_from_dict(doc: dict) -> CandidateEvaluation:
    reports = tuple(
        TierReport(
            speaker_id=r["speaker"],
            feature=r["feature"],
            zero_one_loss=r["zero_one_loss"],
            smoothed_loss=r["smoothed_loss"],
            precision=r["precision"],
            recall=r["recall"],
            f1=r["f1"],
            normalized_error=r["normalized_error"],
            n_sentences=r["n_sentences"],
            n_sentences_skipped=r["n_sentences_skipped"],
            n_words_scored=r["n_words_scored"],
        )
        for r in doc["reports"]
    )
    sentences = tuple(
        SentenceScores(
            speaker_id=s["speaker"],
            sentence_id=s["sentence"],
            feature=s["feature"],
            binary=BinaryScore(
                zero_one_loss=s["zero_one_loss"],
                smoothed_loss=s["smoothed_loss"],
                precision=s["precision"],
                recall=s["recall"],
                f1=s["f1"],
                threshold=s["threshold"],
            ),
            normalized_error=s["normalized_error"],
            n_words=s["n_words"],
            n_words_scored=s["n_words_scored"],
        )
        for s in doc["sentences"]
    )
    return CandidateEvaluation(doc["candidate"], tuple(doc["references"]), reports, sentences)
