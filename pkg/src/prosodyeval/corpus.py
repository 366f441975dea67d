"""Corpus ingestion: manifests, word-level alignments, and WAV audio.

A corpus is described by a JSON manifest listing speakers (human references
and synthetic candidates) and, per speaker, the audio and alignment file for
each sentence.  Alignments come either as a Praat TextGrid (long or short
text format, containing an interval tier named ``words``) or as a JSON
document ``{"words": [{"t": token, "s": start, "e": end}, ...]}``.  Intervals
whose label is a silence token are routed into the utterance's silence list
rather than its word list.

All parsed structures are immutable; audio is loaded lazily, one utterance
at a time.
"""

from __future__ import annotations

import json
import logging
import re
import string
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_SILENCE_TOKENS = frozenset({"[SIL]", "sil", "sp", ""})

ALIGNMENT_FORMATS = ("textgrid", "json")

# Speaker and sentence ids become file name components ("<speaker>__<sentence>.csv"),
# so they must be path-safe and must not contain the "__" separator.
_ID_RE = re.compile(r"^[A-Za-z0-9.-]+(_[A-Za-z0-9.-]+)*$")

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


class ManifestError(ValueError):
    """Raised for malformed or inconsistent corpus manifests."""


class AlignmentError(ValueError):
    """Raised for malformed or invalid alignment files."""


class AudioError(ValueError):
    """Raised for unreadable or unsupported audio files."""


class CorpusError(ValueError):
    """Raised for cross-file inconsistencies discovered while loading."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples (full scale = 1.0) plus sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if self.samples.ndim != 1 or len(self.samples) < 1:
            raise AudioError("audio must contain at least one sample")
        if self.sample_rate_hz <= 0:
            raise AudioError("sample rate must be positive")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class WordInterval:
    token: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class TimeSpan:
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class AlignedUtterance:
    """One speaker's rendition of one sentence, word-aligned.

    ``silences`` holds the aligner-inserted pause intervals in time order;
    ``audio`` is None until resolved by the corpus loader.
    """

    speaker_id: str
    sentence_id: str
    words: tuple[WordInterval, ...]
    silences: tuple[TimeSpan, ...]
    audio: AudioBuffer | None = None

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(w.token for w in self.words)


@dataclass(frozen=True)
class UtteranceRef:
    sentence_id: str
    audio_path: str
    alignment_path: str


@dataclass(frozen=True)
class SpeakerEntry:
    speaker_id: str
    kind: str  # "human" | "synthetic"
    utterances: tuple[UtteranceRef, ...]


@dataclass(frozen=True)
class CorpusManifest:
    speakers: tuple[SpeakerEntry, ...]
    silence_tokens: frozenset[str] = DEFAULT_SILENCE_TOKENS

    def speaker(self, speaker_id: str) -> SpeakerEntry:
        for entry in self.speakers:
            if entry.speaker_id == speaker_id:
                return entry
        raise KeyError(speaker_id)

    @property
    def human_ids(self) -> tuple[str, ...]:
        return tuple(s.speaker_id for s in self.speakers if s.kind == "human")

    @property
    def synthetic_ids(self) -> tuple[str, ...]:
        return tuple(s.speaker_id for s in self.speakers if s.kind == "synthetic")


# ---------------------------------------------------------------------------
# Manifest parsing
# ---------------------------------------------------------------------------


def _check_id(value, what: str) -> str:
    if not isinstance(value, str) or not _ID_RE.match(value):
        raise ManifestError(
            f"invalid {what} {value!r}: ids must match [A-Za-z0-9._-]+ and "
            f"must not contain '__'"
        )
    return value


def parse_manifest(data: bytes) -> CorpusManifest:
    """Parse and validate a corpus manifest from raw JSON bytes.

    Raises ManifestError with the offending line/column for syntax errors,
    and with a description of the violated constraint for semantic errors
    (duplicate ids, candidates lacking two reference speakers, ...).
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ManifestError(f"manifest is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(
            f"manifest parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    if not isinstance(doc, dict) or "speakers" not in doc:
        raise ManifestError("manifest must be a JSON object with a 'speakers' list")

    silence_tokens = DEFAULT_SILENCE_TOKENS
    if "silence_tokens" in doc:
        raw = doc["silence_tokens"]
        if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
            raise ManifestError("'silence_tokens' must be a list of strings")
        silence_tokens = frozenset(raw)

    speakers: list[SpeakerEntry] = []
    seen_speakers: set[str] = set()
    for raw_speaker in doc["speakers"]:
        if not isinstance(raw_speaker, dict):
            raise ManifestError("each speaker entry must be a JSON object")
        try:
            speaker_id = _check_id(raw_speaker["id"], "speaker id")
            kind = raw_speaker["kind"]
            raw_utts = raw_speaker["utterances"]
        except KeyError as exc:
            raise ManifestError(f"speaker entry missing field {exc}") from exc
        if kind not in ("human", "synthetic"):
            raise ManifestError(
                f"speaker {speaker_id!r}: kind must be 'human' or 'synthetic', got {kind!r}"
            )
        if speaker_id in seen_speakers:
            raise ManifestError(f"duplicate speaker id {speaker_id!r}")
        seen_speakers.add(speaker_id)

        utterances: list[UtteranceRef] = []
        seen_sentences: set[str] = set()
        for raw_utt in raw_utts:
            try:
                sentence_id = _check_id(raw_utt["sentence"], "sentence id")
                audio_path = raw_utt["audio"]
                alignment_path = raw_utt["alignment"]
            except KeyError as exc:
                raise ManifestError(
                    f"speaker {speaker_id!r}: utterance missing field {exc}"
                ) from exc
            if sentence_id in seen_sentences:
                raise ManifestError(
                    f"duplicate (speaker, sentence) pair ({speaker_id!r}, {sentence_id!r})"
                )
            seen_sentences.add(sentence_id)
            utterances.append(UtteranceRef(sentence_id, str(audio_path), str(alignment_path)))
        speakers.append(SpeakerEntry(speaker_id, kind, tuple(utterances)))

    manifest = CorpusManifest(tuple(speakers), silence_tokens)
    _check_reference_coverage(manifest)
    return manifest


def _check_reference_coverage(manifest: CorpusManifest) -> None:
    human_sentences: dict[str, int] = {}
    for entry in manifest.speakers:
        if entry.kind != "human":
            continue
        for utt in entry.utterances:
            human_sentences[utt.sentence_id] = human_sentences.get(utt.sentence_id, 0) + 1
    for entry in manifest.speakers:
        if entry.kind != "synthetic":
            continue
        for utt in entry.utterances:
            if human_sentences.get(utt.sentence_id, 0) < 2:
                raise ManifestError(
                    f"candidate {entry.speaker_id!r} claims sentence "
                    f"{utt.sentence_id!r} but fewer than 2 reference speakers have it"
                )


# ---------------------------------------------------------------------------
# Alignment parsing (TextGrid subset + JSON)
# ---------------------------------------------------------------------------


def parse_alignment(
    data: bytes,
    format: str,
    *,
    silence_tokens: frozenset[str] | set[str] = DEFAULT_SILENCE_TOKENS,
    min_silence_s: float = 0.0,
) -> AlignedUtterance:
    """Parse a word alignment into an AlignedUtterance (audio unresolved).

    Intervals labeled with a silence token go to ``silences``; every other
    interval becomes a word.  Silences shorter than ``min_silence_s`` are
    dropped.  Speaker and sentence ids are not stored in alignment files and
    are left empty for the loader to fill in.
    """
    if format not in ALIGNMENT_FORMATS:
        raise AlignmentError(f"unknown alignment format {format!r}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise AlignmentError(f"alignment is not valid UTF-8: {exc}") from exc

    if format == "textgrid":
        intervals = _parse_textgrid(text)
    else:
        intervals = _parse_alignment_json(text)
    return _build_utterance(intervals, frozenset(silence_tokens), min_silence_s)


def _build_utterance(
    intervals: Sequence[tuple[float, float, str]],
    silence_tokens: frozenset[str],
    min_silence_s: float,
) -> AlignedUtterance:
    words: list[WordInterval] = []
    silences: list[TimeSpan] = []
    prev_end = None
    for start, end, label in intervals:
        if end < start:
            raise AlignmentError(f"interval ({start}, {end}, {label!r}) has negative length")
        if prev_end is not None and start < prev_end - 1e-9:
            raise AlignmentError(
                f"overlapping intervals: interval starting at {start} begins before "
                f"previous interval ends at {prev_end}"
            )
        prev_end = max(end, prev_end) if prev_end is not None else end
        if label in silence_tokens:
            if end - start >= max(min_silence_s, 1e-12):
                silences.append(TimeSpan(start, end))
            continue
        if end <= start:
            raise AlignmentError(f"zero-length word interval ({start}, {end}, {label!r})")
        words.append(WordInterval(label, start, end))
    if not words:
        raise AlignmentError("alignment contains no word intervals")
    return AlignedUtterance("", "", tuple(words), tuple(silences))


def _parse_alignment_json(text: str) -> list[tuple[float, float, str]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlignmentError(
            f"alignment JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("words"), list):
        raise AlignmentError("alignment JSON must be an object with a 'words' list")
    intervals = []
    for i, item in enumerate(doc["words"]):
        try:
            intervals.append((float(item["s"]), float(item["e"]), str(item["t"])))
        except (TypeError, KeyError, ValueError) as exc:
            raise AlignmentError(f"bad word entry at index {i}: {exc}") from exc
    return intervals


def _tg_unescape(value: str) -> str:
    return value.replace('""', '"')


def _parse_textgrid(text: str) -> list[tuple[float, float, str]]:
    """Parse a TextGrid (long or short text form) into (start, end, label) triples.

    Only the subset produced by forced aligners is supported: the file must
    contain an interval tier named ``words``.
    """
    lines = text.splitlines()
    if len(lines) < 2 or "ooTextFile" not in lines[0] or "TextGrid" not in lines[1]:
        raise AlignmentError("not a TextGrid: missing ooTextFile/TextGrid header")
    body = [ln for ln in lines[2:] if ln.strip()]
    if not body:
        raise AlignmentError("TextGrid has no content after header")
    is_long = any(ln.lstrip().startswith("xmin") for ln in body[:3])
    if is_long:
        return _parse_textgrid_long(body)
    return _parse_textgrid_short(body)


def _parse_textgrid_short(body: list[str]) -> list[tuple[float, float, str]]:
    # Short form: xmin, xmax, "<exists>", ntiers, then per tier:
    # class, name, xmin, xmax, size, then size * (xmin, xmax, text).
    pos = 0

    def take(what: str) -> str:
        nonlocal pos
        if pos >= len(body):
            raise AlignmentError(f"TextGrid truncated while reading {what}")
        value = body[pos].strip()
        pos += 1
        return value

    def take_num(what: str) -> float:
        raw = take(what)
        try:
            return float(raw)
        except ValueError as exc:
            raise AlignmentError(f"expected number for {what}, got {raw!r}") from exc

    def take_str(what: str) -> str:
        raw = take(what)
        if len(raw) >= 2 and raw.startswith('"') and raw.endswith('"'):
            return _tg_unescape(raw[1:-1])
        raise AlignmentError(f"expected quoted string for {what}, got {raw!r}")

    take_num("file xmin")
    take_num("file xmax")
    flag = take("tier flag")
    if flag != "<exists>":
        raise AlignmentError("TextGrid declares no tiers")
    ntiers = int(take_num("tier count"))
    for _ in range(ntiers):
        tier_class = take_str("tier class")
        tier_name = take_str("tier name")
        take_num("tier xmin")
        take_num("tier xmax")
        size = int(take_num("interval count"))
        if tier_class == "IntervalTier":
            intervals = []
            for _ in range(size):
                start = take_num("interval xmin")
                end = take_num("interval xmax")
                label = take_str("interval text")
                intervals.append((start, end, label))
            if tier_name == "words":
                return intervals
        else:
            if tier_name == "words":
                raise AlignmentError("'words' tier must be an IntervalTier")
            # PointTier: size * (number, text)
            for _ in range(size):
                take_num("point time")
                take_str("point text")
    raise AlignmentError("TextGrid has no interval tier named 'words'")


def _parse_textgrid_long(body: list[str]) -> list[tuple[float, float, str]]:
    pairs: list[tuple[str, str]] = []  # (key, raw value) in document order
    key_re = re.compile(r"^\s*(\w+)(?:\s*\[\d*\])?\s*(?::|=)\s*(.*?)\s*$")
    for i, line in enumerate(body):
        stripped = line.strip()
        if stripped.startswith("tiers?"):
            if "<exists>" not in stripped:
                raise AlignmentError("TextGrid declares no tiers")
            continue
        m = key_re.match(line)
        if not m:
            if stripped.endswith(":"):
                continue
            raise AlignmentError(f"unparseable TextGrid line {i + 3}: {stripped!r}")
        pairs.append((m.group(1), m.group(2)))

    def as_str(raw: str, what: str) -> str:
        if len(raw) >= 2 and raw.startswith('"') and raw.endswith('"'):
            return _tg_unescape(raw[1:-1])
        raise AlignmentError(f"expected quoted string for {what}, got {raw!r}")

    def as_num(raw: str, what: str) -> float:
        try:
            return float(raw)
        except ValueError as exc:
            raise AlignmentError(f"expected number for {what}, got {raw!r}") from exc

    # Walk key/value pairs, tracking the current tier.  Inside the words
    # tier, interval xmin/xmax/text values overwrite the tier header's own
    # xmin/xmax, so each completed triple holds the interval's values.
    tier_class = None
    in_words_tier = False
    current: dict[str, object] = {}
    intervals: list[tuple[float, float, str]] = []
    found = False
    for key, raw in pairs:
        if key == "class":
            tier_class = as_str(raw, "tier class")
            in_words_tier = False
            current = {}
        elif key == "name":
            tier_name = as_str(raw, "tier name")
            if tier_name == "words":
                if tier_class != "IntervalTier":
                    raise AlignmentError("'words' tier must be an IntervalTier")
                in_words_tier = True
                found = True
        elif key == "intervals" and raw.startswith("size"):
            current = {}
        elif in_words_tier and key in ("xmin", "xmax", "text"):
            if key == "text":
                current["text"] = as_str(raw, "interval text")
            else:
                current[key] = as_num(raw, f"interval {key}")
            if len(current) == 3:
                intervals.append(
                    (float(current["xmin"]), float(current["xmax"]), str(current["text"]))
                )
                current = {}
    if not found:
        raise AlignmentError("TextGrid has no interval tier named 'words'")
    if current:
        raise AlignmentError("TextGrid 'words' tier ends mid-interval")
    return intervals


def serialize_alignment(utt: AlignedUtterance, format: str) -> bytes:
    """Serialize words + silences back to TextGrid (long form) or JSON.

    parsing the output reproduces the utterance's words and silences exactly
    (float times round-trip through repr).
    """
    if format not in ALIGNMENT_FORMATS:
        raise AlignmentError(f"unknown alignment format {format!r}")
    entries = [(w.start_s, w.end_s, w.token) for w in utt.words]
    entries += [(s.start_s, s.end_s, "[SIL]") for s in utt.silences]
    entries.sort(key=lambda item: (item[0], item[1]))
    if format == "json":
        doc = {"words": [{"t": label, "s": start, "e": end} for start, end, label in entries]}
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")

    xmin = min(e[0] for e in entries)
    xmax = max(e[1] for e in entries)
    out = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        f"xmin = {xmin!r}",
        f"xmax = {xmax!r}",
        "tiers? <exists>",
        "size = 1",
        "item []:",
        "    item [1]:",
        '        class = "IntervalTier"',
        '        name = "words"',
        f"        xmin = {xmin!r}",
        f"        xmax = {xmax!r}",
        f"        intervals: size = {len(entries)}",
    ]
    for i, (start, end, label) in enumerate(entries, start=1):
        escaped = label.replace('"', '""')
        out += [
            f"        intervals [{i}]:",
            f"            xmin = {start!r}",
            f"            xmax = {end!r}",
            f'            text = "{escaped}"',
        ]
    return ("\n".join(out) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# WAV reading
# ---------------------------------------------------------------------------

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3


def read_audio(data: bytes) -> AudioBuffer:
    """Decode a mono RIFF/WAVE file (PCM16 or float32) into an AudioBuffer.

    Integer samples are scaled to [-1, 1] by dividing by 32768.  Stereo and
    compressed encodings are rejected outright rather than downmixed.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioError("not a RIFF/WAVE file")
    fmt = None
    samples = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if len(body) < chunk_size:
            raise AudioError(f"truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise AudioError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            samples = body
        pos += 8 + chunk_size + (chunk_size & 1)
    if fmt is None:
        raise AudioError("missing fmt chunk")
    if samples is None:
        raise AudioError("missing data chunk")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if channels != 1:
        raise AudioError(f"mono required, file has {channels} channels")
    if sample_rate < 8000:
        raise AudioError(f"sample rate {sample_rate} Hz below 8 kHz minimum")
    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(samples[: len(samples) - len(samples) % 2], dtype="<i2")
        values = raw.astype(np.float64) / 32768.0
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(samples[: len(samples) - len(samples) % 4], dtype="<f4")
        values = raw.astype(np.float64)
    else:
        raise AudioError(
            f"unsupported encoding (format tag {audio_format}, {bits}-bit); "
            f"only PCM16 and float32 are accepted"
        )
    if len(values) == 0:
        raise AudioError("audio data chunk holds no samples")
    values.setflags(write=False)
    return AudioBuffer(values, int(sample_rate))


# ---------------------------------------------------------------------------
# Corpus loading
# ---------------------------------------------------------------------------


def normalize_token(token: str) -> str:
    """Lowercase and strip punctuation, for cross-speaker word comparison."""
    return token.lower().translate(_PUNCT_TABLE)


def alignment_format_for(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".textgrid":
        return "textgrid"
    raise AlignmentError(f"cannot infer alignment format from {path.name!r}")


@dataclass(frozen=True)
class Corpus:
    """Parsed manifest plus all alignments, with lazy audio resolution."""

    manifest: CorpusManifest
    root: Path
    alignments: dict[tuple[str, str], AlignedUtterance]
    audio_paths: dict[tuple[str, str], Path]

    @property
    def human_ids(self) -> tuple[str, ...]:
        return self.manifest.human_ids

    @property
    def synthetic_ids(self) -> tuple[str, ...]:
        return self.manifest.synthetic_ids

    def sentences_for(self, speaker_id: str) -> tuple[str, ...]:
        return tuple(
            sid for (spk, sid) in sorted(self.alignments) if spk == speaker_id
        )

    def utterance(self, speaker_id: str, sentence_id: str, *, with_audio: bool = False) -> AlignedUtterance:
        """Return the utterance, optionally resolving its audio from disk."""
        utt = self.alignments[(speaker_id, sentence_id)]
        if not with_audio:
            return utt
        path = self.audio_paths[(speaker_id, sentence_id)]
        try:
            audio = read_audio(path.read_bytes())
        except OSError as exc:
            raise AudioError(f"cannot read audio file {path}: {exc}") from exc
        _check_audio_covers_alignment(utt, audio, path)
        return replace(utt, audio=audio)


def _check_audio_covers_alignment(utt: AlignedUtterance, audio: AudioBuffer, path: Path) -> None:
    last_end = max(
        [w.end_s for w in utt.words] + [s.end_s for s in utt.silences]
    )
    total = sum(w.end_s - w.start_s for w in utt.words) + sum(
        s.duration_s for s in utt.silences
    )
    tolerance = 0.010
    if last_end > audio.duration_s + tolerance or total > audio.duration_s + tolerance:
        raise CorpusError(
            f"{path}: alignment ({last_end:.3f} s, {total:.3f} s aligned material) "
            f"exceeds audio duration {audio.duration_s:.3f} s"
        )


def load_corpus(manifest_path: str | Path, *, min_silence_s: float = 0.0) -> Corpus:
    """Load a manifest and every alignment it references.

    Verifies that the word token sequence of each sentence is identical
    across speakers (case-insensitive, punctuation stripped); a mismatch
    aborts the load with a diff of the two token sequences.  Audio files are
    only opened later, via ``Corpus.utterance(..., with_audio=True)``.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = parse_manifest(manifest_path.read_bytes())
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {manifest_path}: {exc}") from exc
    root = manifest_path.parent

    alignments: dict[tuple[str, str], AlignedUtterance] = {}
    audio_paths: dict[tuple[str, str], Path] = {}
    reference_tokens: dict[str, tuple[tuple[str, ...], str]] = {}
    for entry in manifest.speakers:
        for ref in entry.utterances:
            align_path = root / ref.alignment_path
            fmt = alignment_format_for(align_path)
            try:
                raw = align_path.read_bytes()
            except OSError as exc:
                raise CorpusError(f"cannot read alignment {align_path}: {exc}") from exc
            try:
                utt = parse_alignment(
                    raw,
                    fmt,
                    silence_tokens=manifest.silence_tokens,
                    min_silence_s=min_silence_s,
                )
            except AlignmentError as exc:
                raise AlignmentError(f"{align_path}: {exc}") from exc
            utt = replace(utt, speaker_id=entry.speaker_id, sentence_id=ref.sentence_id)

            normalized = tuple(normalize_token(t) for t in utt.tokens)
            if ref.sentence_id in reference_tokens:
                expected, first_speaker = reference_tokens[ref.sentence_id]
                if normalized != expected:
                    raise CorpusError(
                        f"word sequence for sentence {ref.sentence_id!r} differs "
                        f"between {first_speaker!r} and {entry.speaker_id!r}:\n"
                        f"  {first_speaker}: {list(expected)}\n"
                        f"  {entry.speaker_id}: {list(normalized)}"
                    )
            else:
                reference_tokens[ref.sentence_id] = (normalized, entry.speaker_id)

            key = (entry.speaker_id, ref.sentence_id)
            alignments[key] = utt
            audio_paths[key] = root / ref.audio_path

    logger.info(
        "loaded corpus: %d speakers, %d utterances", len(manifest.speakers), len(alignments)
    )
    return Corpus(manifest, root, alignments, audio_paths)
