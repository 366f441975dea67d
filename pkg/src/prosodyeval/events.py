"""Binary prosodic event detection on word-level signals.

Events are strict local maxima that rise above a moving-median threshold:
t_i = rho + median of the signal over a word window centered on i, where
rho is a fixed fraction of the signal's standard deviation.  The window is
clamped (shrunk) at signal boundaries rather than padded.  Pause events
come directly from the alignment's silence intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import AlignedUtterance
from .features import extract_durations

ENDPOINT_POLICIES = ("allow_endpoints", "interior_only")
DURATION_TIER_MODES = ("or_combined", "duration_only", "pause_only")

DEFAULT_MIN_PAUSE_MS = 50.0


@dataclass(frozen=True)
class PeakConfig:
    window_words: int = 7
    rho_multiplier: float = 0.5
    endpoint_policy: str = "allow_endpoints"

    def __post_init__(self):
        if self.window_words < 3 or self.window_words % 2 == 0:
            raise ValueError("window_words must be odd and >= 3")
        if self.endpoint_policy not in ENDPOINT_POLICIES:
            raise ValueError(f"endpoint_policy must be one of {ENDPOINT_POLICIES}")


@dataclass(frozen=True)
class EventSeries:
    """Binary event decisions over the words of one utterance."""

    bits: np.ndarray  # bool, length = word count
    feature: str = ""
    speaker_id: str = ""
    sentence_id: str = ""

    def __post_init__(self):
        if self.bits.dtype != np.bool_:
            raise ValueError("bits must be a boolean array")

    def __len__(self) -> int:
        return len(self.bits)


def median_threshold(x: np.ndarray, cfg: PeakConfig | None = None) -> np.ndarray:
    """Moving-median threshold: rho + windowed median, window clamped at edges.

    rho is ``rho_multiplier`` times the population standard deviation of the
    whole signal (one value per signal, not per window).
    """
    cfg = cfg or PeakConfig()
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        return np.empty(0)
    rho = cfg.rho_multiplier * x.std()
    half = cfg.window_words // 2
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = rho + np.median(x[lo:hi])
    return out


def _strict_peaks(x: np.ndarray, thresholds: np.ndarray, endpoint_policy: str) -> np.ndarray:
    n = len(x)
    bits = np.zeros(n, dtype=bool)
    allow_ends = endpoint_policy == "allow_endpoints"
    for i in range(n):
        if x[i] <= thresholds[i]:
            continue
        at_edge = i == 0 or i == n - 1
        if at_edge and not allow_ends:
            continue
        if i > 0 and not x[i] > x[i - 1]:
            continue
        if i < n - 1 and not x[i] > x[i + 1]:
            continue
        bits[i] = True
    return bits


def detect_peaks(
    x: np.ndarray,
    valid: np.ndarray | None = None,
    cfg: PeakConfig | None = None,
    *,
    feature: str = "",
    speaker_id: str = "",
    sentence_id: str = "",
) -> EventSeries:
    """Mark words whose signal value is a strict local maximum above threshold.

    Masked words are never events and are transparent to neighbor tests:
    the threshold and peak checks run on the valid subsequence, and the
    resulting events are re-expanded to the original word positions.
    """
    cfg = cfg or PeakConfig()
    x = np.asarray(x, dtype=float)
    if valid is None:
        valid = np.ones(len(x), dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    if len(valid) != len(x):
        raise ValueError("signal and validity mask lengths differ")
    bits = np.zeros(len(x), dtype=bool)
    idx = np.flatnonzero(valid)
    if len(idx) > 0:
        compact = x[idx]
        thresholds = median_threshold(compact, cfg)
        bits[idx] = _strict_peaks(compact, thresholds, cfg.endpoint_policy)
    return EventSeries(bits, feature, speaker_id, sentence_id)


def pause_events_from_ms(pause_ms: np.ndarray, min_pause_ms: float = DEFAULT_MIN_PAUSE_MS) -> np.ndarray:
    return np.asarray(pause_ms, dtype=float) >= min_pause_ms


def pause_events(
    utt: AlignedUtterance,
    min_pause_ms: float = DEFAULT_MIN_PAUSE_MS,
    *,
    feature: str = "pause",
) -> EventSeries:
    """Event at word i iff the silence following word i lasts >= min_pause_ms."""
    _, pause_ms = extract_durations(utt)
    return EventSeries(
        pause_events_from_ms(pause_ms, min_pause_ms),
        feature,
        utt.speaker_id,
        utt.sentence_id,
    )


def combine_duration_tier(
    duration_bits: np.ndarray, pause_bits: np.ndarray, mode: str = "or_combined"
) -> np.ndarray:
    """Merge duration-peak and pause events into the phrasing tier."""
    if mode not in DURATION_TIER_MODES:
        raise ValueError(f"duration tier mode must be one of {DURATION_TIER_MODES}")
    if mode == "duration_only":
        return np.asarray(duration_bits, dtype=bool)
    if mode == "pause_only":
        return np.asarray(pause_bits, dtype=bool)
    return np.asarray(duration_bits, dtype=bool) | np.asarray(pause_bits, dtype=bool)
