"""Binary-tier scoring of a candidate event series against human references.

The agreement score at word i is the fraction of reference speakers whose
event decision matches the candidate's.  From the agreement vector come a
zero-one loss (agreement below the majority threshold counts as an error),
a smoothed loss that awards partial credit via a sharply decaying Gaussian
of the *dis*agreement, and precision/recall/F1 where a predicted event is a
hit when agreement reaches the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class AgreementVector:
    """Per-word agreement fractions against m reference speakers."""

    alpha: np.ndarray
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one reference speaker")
        if np.any((self.alpha < 0) | (self.alpha > 1)):
            raise ValueError("agreement values must lie in [0, 1]")


@dataclass(frozen=True)
class BinaryScore:
    zero_one_loss: float
    smoothed_loss: float
    precision: float | None
    recall: float | None
    f1: float | None
    threshold: float = DEFAULT_THRESHOLD


def _bits(series) -> np.ndarray:
    bits = getattr(series, "bits", series)
    return np.asarray(bits, dtype=bool)


def agreement(pred, references) -> AgreementVector:
    """Fraction of references agreeing with the candidate at each word."""
    p = _bits(pred)
    refs = [_bits(s) for s in references]
    if not refs:
        raise ValueError("need at least one reference series")
    for s in refs:
        if len(s) != len(p):
            raise ValueError(
                f"length mismatch: candidate has {len(p)} words, reference has {len(s)}"
            )
    matches = np.stack([s == p for s in refs])
    return AgreementVector(matches.mean(axis=0), len(refs))


def zero_one_loss(alpha: AgreementVector, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of words with below-threshold agreement (correct iff alpha >= c)."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    return float(np.mean(alpha.alpha < threshold))


def smoothed_correctness(alpha: np.ndarray) -> np.ndarray:
    """Partial-credit error per word: exp(-(4*pi*alpha)^2).

    1 at zero agreement, decaying rapidly as agreement grows (about 5.2e-5
    at alpha=0.25 and 7.2e-18 at alpha=0.5).
    """
    a = np.asarray(alpha, dtype=float)
    return np.exp(-((4.0 * np.pi * a) ** 2))


def smoothed_loss(alpha: AgreementVector) -> float:
    """Mean smoothed correctness error over words."""
    return float(np.mean(smoothed_correctness(alpha.alpha)))


def precision_recall_f1(
    pred, references, threshold: float = DEFAULT_THRESHOLD
) -> tuple[float | None, float | None, float | None]:
    """Precision, recall and F1 of predicted events under agreement gating.

    A predicted event is correct when agreement reaches the threshold.
    Recall's denominator counts words where at least a threshold fraction
    of references place an event.  Degenerate denominators yield None (no
    predicted events -> precision None; no majority reference events ->
    recall None); F1 is None whenever either side is.
    """
    p = _bits(pred)
    alpha = agreement(pred, references).alpha
    refs = np.stack([_bits(s) for s in references])

    hits = int(np.sum(p & (alpha >= threshold)))
    n_pred = int(np.sum(p))
    n_majority = int(np.sum(refs.mean(axis=0) >= threshold))

    precision = hits / n_pred if n_pred > 0 else None
    recall = hits / n_majority if n_majority > 0 else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def score_events(pred, references, threshold: float = DEFAULT_THRESHOLD) -> BinaryScore:
    """All binary-tier metrics for one candidate series vs a reference set."""
    alpha = agreement(pred, references)
    precision, recall, f1 = precision_recall_f1(pred, references, threshold)
    return BinaryScore(
        zero_one_loss=zero_one_loss(alpha, threshold),
        smoothed_loss=smoothed_loss(alpha),
        precision=precision,
        recall=recall,
        f1=f1,
        threshold=threshold,
    )


def minmax_normalize(values) -> list[float | None]:
    """Map per-speaker values onto [0, 1] by min-max; equal inputs map to 0.5.

    None entries pass through untouched and do not affect the range.
    """
    present = [v for v in values if v is not None]
    if len(present) < 2:
        raise ValueError("min-max normalization needs at least 2 values")
    lo, hi = min(present), max(present)
    span = hi - lo
    out: list[float | None] = []
    for v in values:
        if v is None:
            out.append(None)
        elif span == 0:
            out.append(0.5)
        else:
            out.append((v - lo) / span)
    return out
