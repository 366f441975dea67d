"""Shared fixtures: synthetic audio, alignments, and a small demo corpus.

The demo corpus is generated deterministically from a seed: a few sentences,
several human speakers plus one synthetic candidate, each word rendered as a
harmonic tone (so pitch, spectral balance, and cepstral periodicity are all
well-defined) with occasional silences between words.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import pytest

from prosodyeval.corpus import (
    AlignedUtterance,
    TimeSpan,
    WordInterval,
    serialize_alignment,
)
from prosodyeval.features import FEATURE_COLUMNS, WordFeatureMatrix

SR = 16000

TOKENS = [
    "anna", "dressed", "the", "baby", "in", "crib", "emma", "spoke",
    "quietly", "about", "harvest", "moon", "softly", "rising", "beyond",
]


def write_wav_pcm16(path: Path, samples: np.ndarray, sample_rate: int = SR) -> None:
    data = np.clip(np.asarray(samples) * 32767.0, -32768, 32767).astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16)
    path.write_bytes(header + fmt + b"data" + struct.pack("<I", len(data)) + data)


def wav_bytes_pcm16(samples: np.ndarray, sample_rate: int = SR, channels: int = 1) -> bytes:
    raw = np.clip(np.asarray(samples) * 32767.0, -32768, 32767).astype("<i2")
    if channels == 2:
        raw = np.repeat(raw, 2)
    data = raw.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, channels, sample_rate, sample_rate * 2 * channels, 2 * channels, 16
    )
    return header + fmt + b"data" + struct.pack("<I", len(data)) + data


def harmonic_tone(f0: float, duration_s: float, amplitude: float, sr: int = SR) -> np.ndarray:
    """A few-harmonic tone with a short fade, standing in for a voiced word."""
    t = np.arange(int(round(duration_s * sr))) / sr
    signal = np.zeros_like(t)
    for k, weight in enumerate((1.0, 0.5, 0.3, 0.15), start=1):
        if k * f0 < sr / 2:
            signal += weight * np.sin(2 * np.pi * k * f0 * t)
    signal *= amplitude / (np.max(np.abs(signal)) + 1e-12)
    fade = min(len(t) // 8, 160)
    if fade > 0:
        ramp = np.linspace(0.0, 1.0, fade)
        signal[:fade] *= ramp
        signal[-fade:] *= ramp[::-1]
    return signal


def synth_utterance(
    rng: np.random.Generator,
    tokens: list[str],
    *,
    base_f0: float,
    lead_in_s: float = 0.15,
    pause_after: dict[int, float] | None = None,
) -> tuple[np.ndarray, AlignedUtterance]:
    """Render tokens as tones; returns (samples, alignment with words+silences)."""
    pause_after = pause_after or {}
    pieces = [np.zeros(int(lead_in_s * SR))]
    cursor = lead_in_s
    words = []
    silences = []
    for i, token in enumerate(tokens):
        duration = float(rng.uniform(0.14, 0.26))
        f0 = float(base_f0 * rng.uniform(0.9, 1.15))
        amplitude = float(rng.uniform(0.15, 0.45))
        pieces.append(harmonic_tone(f0, duration, amplitude))
        start = cursor
        cursor = round(cursor + duration, 6)
        words.append(WordInterval(token, round(start, 6), cursor))
        gap = pause_after.get(i, 0.0)
        if gap > 0:
            pieces.append(np.zeros(int(round(gap * SR))))
            silences.append(TimeSpan(cursor, round(cursor + gap, 6)))
            cursor = round(cursor + gap, 6)
    pieces.append(np.zeros(int(0.1 * SR)))
    samples = np.concatenate(pieces)
    return samples, AlignedUtterance("", "", tuple(words), tuple(silences))


@pytest.fixture(scope="session")
def demo_corpus_dir(tmp_path_factory) -> Path:
    """A 3-sentence corpus: 3 humans + 1 synthetic candidate, on disk."""
    root = tmp_path_factory.mktemp("demo_corpus")
    return build_demo_corpus(root, seed=20240501)


def build_demo_corpus(root: Path, *, seed: int) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    sentences = {
        "sent01": (TOKENS[0:6], {1: 0.18}),
        "sent02": (TOKENS[6:12], {2: 0.12, 4: 0.2}),
        "sent03": (TOKENS[3:8], {}),
    }
    speakers = [("S1", "human", 200.0), ("S2", "human", 230.0), ("S3", "human", 185.0),
                ("TTSX", "synthetic", 210.0)]
    manifest = {"speakers": []}
    for idx, (speaker, kind, base_f0) in enumerate(speakers):
        utterances = []
        for sid, (tokens, pauses) in sentences.items():
            samples, utt = synth_utterance(rng, list(tokens), base_f0=base_f0, pause_after=pauses)
            wav_name = f"{speaker}_{sid}.wav"
            write_wav_pcm16(root / wav_name, samples)
            # alternate alignment formats across speakers to exercise both parsers
            if idx % 2 == 0:
                align_name = f"{speaker}_{sid}.TextGrid"
                (root / align_name).write_bytes(serialize_alignment(utt, "textgrid"))
            else:
                align_name = f"{speaker}_{sid}.json"
                (root / align_name).write_bytes(serialize_alignment(utt, "json"))
            utterances.append({"sentence": sid, "audio": wav_name, "alignment": align_name})
        manifest["speakers"].append({"id": speaker, "kind": kind, "utterances": utterances})
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return root


def make_matrix(
    speaker: str,
    sentence: str,
    columns: dict[str, np.ndarray],
    masks: dict[str, np.ndarray] | None = None,
    n_words: int | None = None,
) -> WordFeatureMatrix:
    """Build a feature matrix with given columns; the rest default to ones."""
    masks = masks or {}
    if n_words is None:
        n_words = len(next(iter(columns.values())))
    values = {}
    valid = {}
    for column in FEATURE_COLUMNS:
        if column in columns:
            values[column] = np.asarray(columns[column], dtype=float)
        elif column == "pause_ms":
            values[column] = np.zeros(n_words)
        else:
            values[column] = np.ones(n_words)
        valid[column] = np.asarray(
            masks.get(column, np.ones(n_words, dtype=bool)), dtype=bool
        )
    return WordFeatureMatrix(speaker, sentence, tuple(f"w{i}" for i in range(n_words)), values, valid)
