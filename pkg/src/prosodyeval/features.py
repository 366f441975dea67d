"""Word-level acoustic feature extraction.

Six measures are computed per word from audio plus alignment: duration and
trailing pause (from the alignment), and frame-level F0, intensity, two
spectral-balance ratios (1-5 kHz vs 50 Hz-1 kHz, and 300-800 Hz vs
0-300 Hz), and smoothed cepstral peak prominence, each averaged over the
frames whose centers fall inside the word interval.

All functions are pure: given the same audio and config they return the
same values, and distinct utterances can be processed in parallel.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AlignedUtterance, AudioBuffer

logger = logging.getLogger(__name__)

#: Column order of the word feature matrix (also the CSV column order and
#: the bit order of the CSV valid_flags field).
FEATURE_COLUMNS = (
    "duration_ms",
    "pause_ms",
    "f0_hz",
    "intensity_db",
    "alpha_ratio_db",
    "l1_l0_db",
    "cpps_db",
)

FEATURE_CSV_HEADER = ("word", "token") + FEATURE_COLUMNS + ("valid_flags",)


class FeatureFileError(ValueError):
    """Raised for malformed feature CSV files."""


@dataclass(frozen=True)
class AnalysisConfig:
    """Frame-analysis settings shared by all acoustic measures."""

    frame_length_s: float = 0.040
    frame_step_s: float = 0.010
    pitch_floor_hz: float = 75.0
    pitch_ceiling_hz: float = 500.0
    voicing_threshold: float = 0.45
    intensity_floor_db: float = -120.0
    spectral_floor_db: float = -120.0

    def __post_init__(self):
        if not 0 < self.frame_step_s <= self.frame_length_s:
            raise ValueError("require 0 < frame_step_s <= frame_length_s")
        if not 0 < self.pitch_floor_hz < self.pitch_ceiling_hz:
            raise ValueError("require 0 < pitch_floor_hz < pitch_ceiling_hz")


@dataclass(frozen=True)
class FrameTrack:
    """One measurement per analysis frame, with a per-frame validity mask.

    For F0 the mask marks voiced frames; for spectral measures it marks
    frames where the measurement is defined (non-silent, band available).
    """

    values: np.ndarray
    frame_times_s: np.ndarray
    voiced_mask: np.ndarray

    def __post_init__(self):
        if not (len(self.values) == len(self.frame_times_s) == len(self.voiced_mask)):
            raise ValueError("track arrays must have equal length")
        if len(self.frame_times_s) > 1 and not np.all(np.diff(self.frame_times_s) > 0):
            raise ValueError("frame times must be strictly increasing")


@dataclass(frozen=True)
class WordFeatureMatrix:
    """Per-utterance table: one row per word, one column per feature.

    ``values[column]`` is a float vector (NaN where invalid) and
    ``valid[column]`` the matching boolean mask.
    """

    speaker_id: str
    sentence_id: str
    tokens: tuple[str, ...]
    values: dict[str, np.ndarray]
    valid: dict[str, np.ndarray]

    def __post_init__(self):
        n = len(self.tokens)
        for column in FEATURE_COLUMNS:
            if column not in self.values or column not in self.valid:
                raise ValueError(f"missing feature column {column!r}")
            if len(self.values[column]) != n or len(self.valid[column]) != n:
                raise ValueError(f"column {column!r} length differs from word count")

    @property
    def n_words(self) -> int:
        return len(self.tokens)

    def column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self.values[name], self.valid[name]


def _frame_signal(x: np.ndarray, sr: int, cfg: AnalysisConfig) -> tuple[np.ndarray, np.ndarray]:
    """Slice a signal into overlapping frames; returns (frames, center times)."""
    length = int(round(cfg.frame_length_s * sr))
    step = int(round(cfg.frame_step_s * sr))
    if length < 2 or step < 1:
        raise ValueError("frame length/step too short for this sample rate")
    n = len(x)
    if n < length:
        return np.empty((0, length)), np.empty(0)
    count = 1 + (n - length) // step
    offsets = step * np.arange(count)
    frames = x[offsets[:, None] + np.arange(length)[None, :]]
    centers = (offsets + length / 2.0) / sr
    return frames, centers


def _next_pow2(n: int) -> int:
    return 1 << (int(n - 1).bit_length())


def extract_durations(utt: AlignedUtterance) -> tuple[np.ndarray, np.ndarray]:
    """Word durations and trailing pauses, both in milliseconds.

    ``pause_ms[i]`` is the total silence immediately following word i (all
    silences between word i and word i+1, or after the final word); leading
    silence before the first word is attributed to no word.
    """
    starts = np.array([w.start_s for w in utt.words])
    ends = np.array([w.end_s for w in utt.words])
    duration_ms = (ends - starts) * 1000.0
    pause_ms = np.zeros(len(utt.words))
    for silence in utt.silences:
        idx = int(np.searchsorted(ends, silence.start_s + 1e-9, side="right")) - 1
        if idx >= 0:
            pause_ms[idx] += silence.duration_s * 1000.0
    return duration_ms, pause_ms


#: Per-octave penalty when choosing among autocorrelation peaks.  Peaks at
#: integer multiples of the true period are near-identical for clean tones;
#: the penalty breaks those ties toward the shorter lag.
F0_OCTAVE_COST = 0.01


def estimate_f0(audio: AudioBuffer, cfg: AnalysisConfig) -> FrameTrack:
    """Frame-level F0 via normalized autocorrelation.

    Each frame is mean-subtracted and Hann-windowed; its autocorrelation
    (computed through the FFT) is divided by the window's own
    autocorrelation, which flattens the lag envelope so a stationary tone
    peaks at 1.0 at every period multiple.  Candidate peaks in the
    [pitch_floor_hz, pitch_ceiling_hz] lag range compete under a small
    per-octave penalty against subharmonic picks, and the winner is refined
    by parabolic interpolation.  Frames whose winning peak falls below the
    voicing threshold, or outside the pitch range, are unvoiced.
    """
    sr = audio.sample_rate_hz
    frames, times = _frame_signal(audio.samples, sr, cfg)
    count, length = frames.shape
    values = np.full(count, np.nan)
    voiced = np.zeros(count, dtype=bool)
    if count == 0:
        return FrameTrack(values, times, voiced)

    window = np.hanning(length)
    frames = (frames - frames.mean(axis=1, keepdims=True)) * window
    nfft = _next_pow2(2 * length)
    spectrum = np.fft.rfft(frames, nfft)
    acf = np.fft.irfft(spectrum.real**2 + spectrum.imag**2, nfft)[:, :length]
    window_spectrum = np.fft.rfft(window, nfft)
    window_acf = np.fft.irfft(
        window_spectrum.real**2 + window_spectrum.imag**2, nfft
    )[:length]

    lag_min = max(2, int(np.floor(sr / cfg.pitch_ceiling_hz)))
    lag_max = min(int(np.ceil(sr / cfg.pitch_floor_hz)), length - 2)
    if lag_max <= lag_min:
        return FrameTrack(values, times, voiced)

    energy = acf[:, 0]
    live = energy > 0
    norm = np.zeros_like(acf)
    norm[live] = (acf[live] / energy[live, None]) / (window_acf[None, :] / window_acf[0])

    mid = norm[:, lag_min : lag_max + 1]
    is_peak = (mid > norm[:, lag_min - 1 : lag_max]) & (mid > norm[:, lag_min + 1 : lag_max + 2])
    lags_in_range = np.arange(lag_min, lag_max + 1)
    octave_penalty = F0_OCTAVE_COST * np.log2(lags_in_range * cfg.pitch_floor_hz / sr)
    scores = np.where(is_peak, mid - octave_penalty[None, :], -np.inf)
    best_rel = np.argmax(scores, axis=1)
    rows = np.arange(count)
    has_peak = live & np.isfinite(scores[rows, best_rel])

    lag = best_rel + lag_min
    left = norm[rows, lag - 1]
    right = norm[rows, np.minimum(lag + 1, length - 1)]
    center = norm[rows, lag]
    denom = left - 2.0 * center + right
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(np.abs(denom) > 1e-12, 0.5 * (left - right) / denom, 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    refined_lag = lag + delta
    refined_value = center - 0.25 * (left - right) * delta

    with np.errstate(divide="ignore", invalid="ignore"):
        f0 = np.where(refined_lag > 0, sr / refined_lag, np.nan)
    voiced = (
        has_peak
        & (refined_value >= cfg.voicing_threshold)
        & (f0 >= cfg.pitch_floor_hz)
        & (f0 <= cfg.pitch_ceiling_hz)
    )
    values[voiced] = f0[voiced]
    return FrameTrack(values, times, voiced)


def frame_intensity(audio: AudioBuffer, cfg: AnalysisConfig) -> FrameTrack:
    """Frame intensity in dB relative to full scale (Hann-windowed).

    A full-scale sine reads about -3.01 dBFS; values below
    ``intensity_floor_db`` are clamped to the floor.
    """
    frames, times = _frame_signal(audio.samples, audio.sample_rate_hz, cfg)
    if frames.shape[0] == 0:
        return FrameTrack(np.empty(0), times, np.empty(0, dtype=bool))
    window = np.hanning(frames.shape[1])
    mean_square = ((frames * window) ** 2).sum(axis=1) / (window**2).sum()
    floor_power = 10.0 ** (cfg.intensity_floor_db / 10.0)
    db = 10.0 * np.log10(np.maximum(mean_square, floor_power))
    return FrameTrack(db, times, np.ones(len(db), dtype=bool))


def _band_power(power: np.ndarray, freqs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    sel = (freqs >= lo) & (freqs < hi)
    return power[:, sel].sum(axis=1)


def spectral_band_measures(
    audio: AudioBuffer, cfg: AnalysisConfig
) -> tuple[FrameTrack, FrameTrack]:
    """Frame-level spectral balance: (alpha ratio, L1-L0), both in dB.

    alpha ratio = band level 1-5 kHz minus band level 50 Hz-1 kHz;
    L1-L0 = band level 300-800 Hz minus band level 0-300 Hz.  Band edges are
    half-open [lo, hi).  A band with zero energy reports the
    ``spectral_floor_db`` level.  Alpha ratio needs a sample rate of at
    least 10 kHz; below that its frames are all marked invalid.  Silent
    frames are invalid for both measures.
    """
    sr = audio.sample_rate_hz
    frames, times = _frame_signal(audio.samples, sr, cfg)
    count, length = frames.shape
    if count == 0:
        empty = np.empty(0)
        mask = np.empty(0, dtype=bool)
        return FrameTrack(empty, times, mask), FrameTrack(empty.copy(), times, mask.copy())

    window = np.hanning(length)
    nfft = _next_pow2(4 * length)
    power = np.abs(np.fft.rfft(frames * window, nfft)) ** 2
    freqs = np.fft.rfftfreq(nfft, 1.0 / sr)
    floor_energy = 10.0 ** (cfg.spectral_floor_db / 10.0)

    def level(lo: float, hi: float) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(_band_power(power, freqs, lo, hi), floor_energy))

    floor_power = 10.0 ** (cfg.intensity_floor_db / 10.0)
    non_silent = (frames**2).mean(axis=1) > floor_power

    alpha = level(1000.0, 5000.0) - level(50.0, 1000.0)
    alpha_mask = non_silent & (sr >= 10000)
    l1_l0 = level(300.0, 800.0) - level(0.0, 300.0)
    alpha[~alpha_mask] = np.nan
    l1_l0_masked = l1_l0.copy()
    l1_l0_masked[~non_silent] = np.nan
    return (
        FrameTrack(alpha, times, alpha_mask),
        FrameTrack(l1_l0_masked, times.copy(), non_silent.copy()),
    )


def _moving_average(values: np.ndarray, window: int, axis: int) -> np.ndarray:
    """Boundary-clamped moving average along an axis (window shrinks at edges)."""
    if window <= 1:
        return values
    half = window // 2
    moved = np.moveaxis(values, axis, 0)
    n = moved.shape[0]
    csum = np.concatenate([np.zeros((1,) + moved.shape[1:]), np.cumsum(moved, axis=0)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    out = (csum[hi] - csum[lo]) / (hi - lo).reshape((-1,) + (1,) * (moved.ndim - 1))
    return np.moveaxis(out, 0, axis)


def compute_cpps(audio: AudioBuffer, cfg: AnalysisConfig) -> FrameTrack:
    """Smoothed cepstral peak prominence per frame, in dB.

    Each frame's log power spectrum is transformed back to quefrency (the
    real cepstrum); its square, read in dB, is the power cepstrum.  The
    cepstrogram is smoothed by boundary-clamped moving averages over time
    (7 frames) then quefrency (11 bins), and the prominence is the height
    of the strongest peak in the [1/pitch_ceiling, 1/pitch_floor] quefrency
    range above a linear trend fitted across that range.  Silent frames are
    invalid with value 0.
    """
    sr = audio.sample_rate_hz
    frames, times = _frame_signal(audio.samples, sr, cfg)
    count, length = frames.shape
    if count == 0:
        return FrameTrack(np.empty(0), times, np.empty(0, dtype=bool))

    window = np.hanning(length)
    nfft = _next_pow2(4 * length)
    power = np.abs(np.fft.rfft(frames * window, nfft)) ** 2
    floor_energy = 10.0 ** (cfg.spectral_floor_db / 10.0)
    log_spectrum = np.log(np.maximum(power, floor_energy))
    cepstrum = np.fft.irfft(log_spectrum, nfft)

    q_min = max(2, int(np.ceil(sr / cfg.pitch_ceiling_hz)))
    q_max = min(int(np.floor(sr / cfg.pitch_floor_hz)), nfft // 2 - 1)
    if q_max <= q_min + 2:
        mask = np.zeros(count, dtype=bool)
        return FrameTrack(np.zeros(count), times, mask)

    power_cepstrum = cepstrum[:, : q_max + 1 + 5] ** 2
    power_cepstrum = _moving_average(power_cepstrum, 7, axis=0)
    power_cepstrum = _moving_average(power_cepstrum, 11, axis=1)
    cepstrum_db = 10.0 * np.log10(np.maximum(power_cepstrum, 1e-300))

    quefrencies = np.arange(q_min, q_max + 1, dtype=float)
    band = cepstrum_db[:, q_min : q_max + 1]
    peak_idx = np.argmax(band, axis=1)
    peak_value = band[np.arange(count), peak_idx]
    peak_q = quefrencies[peak_idx]

    # Per-frame least-squares line over the searched quefrency band.
    q_mean = quefrencies.mean()
    q_var = ((quefrencies - q_mean) ** 2).sum()
    band_mean = band.mean(axis=1)
    slope = ((quefrencies - q_mean)[None, :] * (band - band_mean[:, None])).sum(axis=1) / q_var
    trend_at_peak = band_mean + slope * (peak_q - q_mean)
    prominence = peak_value - trend_at_peak

    floor_power = 10.0 ** (cfg.intensity_floor_db / 10.0)
    valid = (frames**2).mean(axis=1) > floor_power
    prominence[~valid] = 0.0
    return FrameTrack(prominence, times, valid)


def aggregate_to_words(
    utt: AlignedUtterance,
    tracks: dict[str, FrameTrack],
    cfg: AnalysisConfig,
) -> WordFeatureMatrix:
    """Average frame tracks into one value per word.

    ``tracks`` maps "f0", "intensity", "alpha_ratio", "l1_l0" and "cpps" to
    their FrameTracks.  Only frames whose centers lie inside the word
    interval and whose track mask is set are averaged; a word with no
    qualifying frames gets valid=False for that column (never an error).
    """
    duration_ms, pause_ms = extract_durations(utt)
    n = utt.n_words
    values: dict[str, np.ndarray] = {
        "duration_ms": duration_ms,
        "pause_ms": pause_ms,
    }
    valid: dict[str, np.ndarray] = {
        "duration_ms": np.ones(n, dtype=bool),
        "pause_ms": np.ones(n, dtype=bool),
    }
    track_to_column = {
        "f0": "f0_hz",
        "intensity": "intensity_db",
        "alpha_ratio": "alpha_ratio_db",
        "l1_l0": "l1_l0_db",
        "cpps": "cpps_db",
    }
    for track_name, column in track_to_column.items():
        track = tracks[track_name]
        out = np.full(n, np.nan)
        ok = np.zeros(n, dtype=bool)
        for i, word in enumerate(utt.words):
            sel = (
                (track.frame_times_s >= word.start_s)
                & (track.frame_times_s < word.end_s)
                & track.voiced_mask
            )
            if np.any(sel):
                out[i] = track.values[sel].mean()
                ok[i] = True
        values[column] = out
        valid[column] = ok
    return WordFeatureMatrix(utt.speaker_id, utt.sentence_id, utt.tokens, values, valid)


def extract_features(utt: AlignedUtterance, cfg: AnalysisConfig | None = None) -> WordFeatureMatrix:
    """Compute every frame track for an utterance and aggregate to words."""
    if utt.audio is None:
        raise ValueError(f"utterance ({utt.speaker_id}, {utt.sentence_id}) has no audio attached")
    cfg = cfg or AnalysisConfig()
    alpha, l1_l0 = spectral_band_measures(utt.audio, cfg)
    tracks = {
        "f0": estimate_f0(utt.audio, cfg),
        "intensity": frame_intensity(utt.audio, cfg),
        "alpha_ratio": alpha,
        "l1_l0": l1_l0,
        "cpps": compute_cpps(utt.audio, cfg),
    }
    return aggregate_to_words(utt, tracks, cfg)


# ---------------------------------------------------------------------------
# Feature CSV round-trip
# ---------------------------------------------------------------------------


def write_feature_csv(matrix: WordFeatureMatrix) -> str:
    """Render a word feature matrix as CSV text (fixed column order)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FEATURE_CSV_HEADER)
    for i, token in enumerate(matrix.tokens):
        flags = "".join(
            "1" if matrix.valid[column][i] else "0" for column in FEATURE_COLUMNS
        )
        row: list[str] = [str(i), token]
        for column in FEATURE_COLUMNS:
            if matrix.valid[column][i]:
                row.append(repr(float(matrix.values[column][i])))
            else:
                row.append("")
        row.append(flags)
        writer.writerow(row)
    return buffer.getvalue()


def read_feature_csv(text: str, speaker_id: str, sentence_id: str) -> WordFeatureMatrix:
    """Parse CSV text produced by :func:`write_feature_csv`."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or tuple(rows[0]) != FEATURE_CSV_HEADER:
        raise FeatureFileError(
            f"bad feature CSV header: expected {','.join(FEATURE_CSV_HEADER)}"
        )
    tokens: list[str] = []
    columns = {c: [] for c in FEATURE_COLUMNS}
    masks = {c: [] for c in FEATURE_COLUMNS}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(FEATURE_CSV_HEADER):
            raise FeatureFileError(f"row {lineno}: expected {len(FEATURE_CSV_HEADER)} fields")
        tokens.append(row[1])
        flags = row[-1]
        if len(flags) != len(FEATURE_COLUMNS) or set(flags) - {"0", "1"}:
            raise FeatureFileError(f"row {lineno}: bad valid_flags {flags!r}")
        for j, column in enumerate(FEATURE_COLUMNS):
            cell = row[2 + j]
            ok = flags[j] == "1"
            if ok:
                try:
                    value = float(cell)
                except ValueError as exc:
                    raise FeatureFileError(f"row {lineno}: bad {column} value {cell!r}") from exc
            else:
                value = np.nan
            columns[column].append(value)
            masks[column].append(ok)
    return WordFeatureMatrix(
        speaker_id,
        sentence_id,
        tuple(tokens),
        {c: np.array(v, dtype=float) for c, v in columns.items()},
        {c: np.array(v, dtype=bool) for c, v in masks.items()},
    )


def feature_csv_path(out_dir: Path, speaker_id: str, sentence_id: str) -> Path:
    return out_dir / f"{speaker_id}__{sentence_id}.csv"
