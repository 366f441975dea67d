"""Two-tier prosody evaluation toolkit.

Scores a candidate speaker's word-aligned renditions against a human
reference corpus on two tiers: binary prosodic-event placement (agreement
scores, hard and smoothed losses, precision/recall/F1) and continuous
acoustic realization (mean squared z-score error), across duration, pause,
pitch, intensity, two spectral-balance ratios, and smoothed cepstral peak
prominence.  Includes the perceptual-experiment statistics (MOS summaries,
humanness proportions, pairwise win matrices, Bradley-Terry scores, Welch
t-tests) used to validate the acoustic metrics.
"""

__version__ = "0.1.0"

from .binary import (
    AgreementVector,
    BinaryScore,
    agreement,
    minmax_normalize,
    precision_recall_f1,
    score_events,
    smoothed_correctness,
    smoothed_loss,
    zero_one_loss,
)
from .continuous import ReferenceDistribution, build_reference, normalized_error
from .corpus import (
    AlignedUtterance,
    AudioBuffer,
    Corpus,
    CorpusManifest,
    load_corpus,
    parse_alignment,
    parse_manifest,
    read_audio,
    serialize_alignment,
)
from .events import (
    EventSeries,
    PeakConfig,
    combine_duration_tier,
    detect_peaks,
    median_threshold,
    pause_events,
)
from .features import (
    AnalysisConfig,
    FrameTrack,
    WordFeatureMatrix,
    aggregate_to_words,
    compute_cpps,
    estimate_f0,
    extract_durations,
    extract_features,
    frame_intensity,
    spectral_band_measures,
)
from .normalize import znorm
from .perception import (
    BtmResult,
    MosSummary,
    PairwiseRecord,
    RatingRecord,
    TTestResult,
    fit_btm,
    humanness_proportion,
    mos_summary,
    welch_t_test,
    win_matrix,
)
from .pipeline import (
    EVAL_FEATURES,
    CandidateEvaluation,
    EvalConfig,
    FeatureCorpus,
    GroupComparison,
    TierReport,
    build_feature_corpus,
    compare_groups,
    evaluate_candidate,
    self_validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
