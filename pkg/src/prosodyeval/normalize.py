"""Per-speaker, per-sentence z-normalization of word feature columns.

Each feature column of a word feature matrix is z-scored over its valid
entries within the utterance, so downstream comparisons are insensitive to
per-speaker offsets and scales.  Population statistics are the default
(``ddof=0``); columns with fewer than two valid entries or near-zero spread
map to zeros rather than blowing up.
"""

from __future__ import annotations

import numpy as np

from .features import FEATURE_COLUMNS, WordFeatureMatrix

ZERO_SPREAD = 1e-9


def znorm(
    matrix: WordFeatureMatrix,
    *,
    ddof: int = 0,
    features: tuple[str, ...] | None = None,
) -> WordFeatureMatrix:
    """Z-score each feature column over its valid entries.

    Masked entries never influence the statistics and stay masked (NaN).
    A column whose valid entries number fewer than two, or whose spread is
    below 1e-9, becomes all zeros with its valid flags preserved.
    ``features`` restricts normalization to a subset of columns; the rest
    pass through unchanged.
    """
    selected = FEATURE_COLUMNS if features is None else features
    values: dict[str, np.ndarray] = {}
    for column in FEATURE_COLUMNS:
        v = matrix.values[column]
        ok = matrix.valid[column]
        if column not in selected:
            values[column] = v.copy()
            continue
        out = np.full(len(v), np.nan)
        n_ok = int(ok.sum())
        if n_ok >= 1:
            if n_ok >= 2:
                mean = v[ok].mean()
                std = v[ok].std(ddof=ddof)
            else:
                std = 0.0
            if n_ok < 2 or std < ZERO_SPREAD:
                out[ok] = 0.0
            else:
                out[ok] = (v[ok] - mean) / std
        values[column] = out
    return WordFeatureMatrix(
        matrix.speaker_id,
        matrix.sentence_id,
        matrix.tokens,
        values,
        {c: m.copy() for c, m in matrix.valid.items()},
    )
