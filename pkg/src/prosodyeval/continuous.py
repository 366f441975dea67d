"""Continuous-tier scoring: squared z-score error against the reference spread.

For each word, the human reference values define a mean and standard
deviation; the candidate's error is the mean squared z-score of its values
under those per-word distributions.  Words where humans agree tightly are
weighted heavily, words where humans themselves vary are forgiving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_SPREAD = 1e-9


@dataclass(frozen=True)
class ReferenceDistribution:
    """Per-word mean/std over the valid reference values.

    ``scorable`` marks words with at least two valid references and a
    non-degenerate spread; only those participate in scoring.
    """

    mean: np.ndarray
    std: np.ndarray
    count: np.ndarray
    scorable: np.ndarray

    @property
    def n_words(self) -> int:
        return len(self.mean)


def build_reference(
    signals: list[np.ndarray],
    masks: list[np.ndarray] | None = None,
    *,
    ddof: int = 0,
) -> ReferenceDistribution:
    """Per-word statistics over m reference signals (m >= 2).

    ``masks`` marks valid entries per signal; masked values are excluded
    from the statistics.  Words with fewer than 2 valid values, or with
    spread below 1e-9, are flagged unscorable.
    """
    if len(signals) < 2:
        raise ValueError("need at least 2 reference signals")
    data = np.stack([np.asarray(s, dtype=float) for s in signals])
    if masks is None:
        ok = np.isfinite(data)
    else:
        ok = np.stack([np.asarray(m, dtype=bool) for m in masks])
        if ok.shape != data.shape:
            raise ValueError("signals and masks have different shapes")
        ok = ok & np.isfinite(data)

    n_words = data.shape[1]
    mean = np.zeros(n_words)
    std = np.zeros(n_words)
    count = ok.sum(axis=0)
    for i in range(n_words):
        values = data[ok[:, i], i]
        if len(values) >= 2:
            mean[i] = values.mean()
            std[i] = values.std(ddof=ddof)
    scorable = (count >= 2) & (std >= ZERO_SPREAD)
    return ReferenceDistribution(mean, std, count.astype(int), scorable)


def normalized_error(
    candidate: np.ndarray,
    mask: np.ndarray | None,
    reference: ReferenceDistribution,
) -> float | None:
    """Mean squared z-score of the candidate under the reference distribution.

    Words that are unscorable in the reference, or masked/non-finite in the
    candidate, are excluded from the mean.  Returns None when no word is
    scorable.
    """
    p = np.asarray(candidate, dtype=float)
    if len(p) != reference.n_words:
        raise ValueError(
            f"length mismatch: candidate has {len(p)} words, reference has {reference.n_words}"
        )
    ok = np.ones(len(p), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    sel = ok & np.isfinite(p) & reference.scorable
    if not np.any(sel):
        return None
    z = (p[sel] - reference.mean[sel]) / reference.std[sel]
    return float(np.mean(z**2))
