"""Statistics over perceptual-experiment data.

Covers per-speaker MOS summaries, the proportion of listeners judging each
speaker human, directed pairwise win proportions, Bradley-Terry strength
fitting via minorization-maximization, and Welch's unequal-variance t-test
with a self-contained Student-t tail probability (regularized incomplete
beta through Lentz's continued fraction, accurate well past 1e-10).
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

MOS_MIN, MOS_MAX = 1, 5

BTM_SCORE_CLAMP = 20.0


class PerceptionDataError(ValueError):
    """Raised for malformed ratings/pairs CSV rows."""


@dataclass(frozen=True)
class RatingRecord:
    listener_id: str
    speaker_id: str
    sentence_id: str
    mos: int
    judged_human: bool


@dataclass(frozen=True)
class PairwiseRecord:
    listener_id: str
    sentence_id: str
    speaker_a: str
    speaker_b: str
    winner: str

    def __post_init__(self):
        if self.speaker_a == self.speaker_b:
            raise PerceptionDataError("pairwise record compares a speaker to itself")
        if self.winner not in (self.speaker_a, self.speaker_b):
            raise PerceptionDataError(
                f"winner {self.winner!r} is neither {self.speaker_a!r} nor {self.speaker_b!r}"
            )


@dataclass(frozen=True)
class MosSummary:
    mean: float
    stderr: float | None
    n: int


@dataclass(frozen=True)
class BtmResult:
    scores: dict[str, float]
    converged: bool
    iterations: int


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------

RATINGS_HEADER = ("listener", "speaker", "sentence", "mos", "judged_human")
PAIRS_HEADER = ("listener", "sentence", "speaker_a", "speaker_b", "winner")

_BOOL_VALUES = {
    "true": True,
    "false": False,
    "1": True,
    "0": False,
    "yes": True,
    "no": False,
}


def read_ratings_csv(text: str) -> list[RatingRecord]:
    """Parse rating rows; errors carry the offending line number."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != RATINGS_HEADER:
        raise PerceptionDataError(
            f"ratings CSV must start with header {','.join(RATINGS_HEADER)}"
        )
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise PerceptionDataError(f"ratings row {lineno}: expected 5 fields, got {len(row)}")
        listener, speaker, sentence, mos_raw, judged_raw = (field.strip() for field in row)
        try:
            mos = int(mos_raw)
        except ValueError as exc:
            raise PerceptionDataError(f"ratings row {lineno}: bad mos {mos_raw!r}") from exc
        if not MOS_MIN <= mos <= MOS_MAX:
            raise PerceptionDataError(
                f"ratings row {lineno}: mos must be in [{MOS_MIN}, {MOS_MAX}], got {mos}"
            )
        judged = _BOOL_VALUES.get(judged_raw.lower())
        if judged is None:
            raise PerceptionDataError(
                f"ratings row {lineno}: bad judged_human {judged_raw!r}"
            )
        records.append(RatingRecord(listener, speaker, sentence, mos, judged))
    return records


def read_pairs_csv(text: str) -> list[PairwiseRecord]:
    """Parse pairwise-comparison rows; errors carry the offending line number."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != PAIRS_HEADER:
        raise PerceptionDataError(f"pairs CSV must start with header {','.join(PAIRS_HEADER)}")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise PerceptionDataError(f"pairs row {lineno}: expected 5 fields, got {len(row)}")
        listener, sentence, a, b, winner = (field.strip() for field in row)
        try:
            records.append(PairwiseRecord(listener, sentence, a, b, winner))
        except PerceptionDataError as exc:
            raise PerceptionDataError(f"pairs row {lineno}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


def mos_summary(records: list[RatingRecord]) -> dict[str, MosSummary]:
    """Per-speaker MOS mean and standard error (sample std / sqrt(n))."""
    if not records:
        raise ValueError("no rating records")
    by_speaker: dict[str, list[int]] = defaultdict(list)
    for record in records:
        by_speaker[record.speaker_id].append(record.mos)
    out = {}
    for speaker in sorted(by_speaker):
        ratings = np.array(by_speaker[speaker], dtype=float)
        n = len(ratings)
        stderr = float(ratings.std(ddof=1) / math.sqrt(n)) if n >= 2 else None
        out[speaker] = MosSummary(float(ratings.mean()), stderr, n)
    return out


def humanness_proportion(records: list[RatingRecord]) -> dict[str, float]:
    """Fraction of judgments per speaker that deemed the speaker human."""
    totals: dict[str, int] = defaultdict(int)
    human: dict[str, int] = defaultdict(int)
    for record in records:
        totals[record.speaker_id] += 1
        human[record.speaker_id] += int(record.judged_human)
    return {speaker: human[speaker] / totals[speaker] for speaker in sorted(totals)}


def win_matrix(records: list[PairwiseRecord]) -> dict[str, dict[str, float]]:
    """Directed win proportions: W[a][b] = share of a-vs-b trials won by a.

    Only pairs with at least one trial appear; W[a][b] + W[b][a] = 1.
    """
    wins: dict[tuple[str, str], int] = defaultdict(int)
    trials: dict[tuple[str, str], int] = defaultdict(int)
    for record in records:
        key = tuple(sorted((record.speaker_a, record.speaker_b)))
        trials[key] += 1
        if record.winner == key[0]:
            wins[key] += 1
    out: dict[str, dict[str, float]] = defaultdict(dict)
    for (a, b), n in trials.items():
        share = wins[(a, b)] / n
        out[a][b] = share
        out[b][a] = 1.0 - share
    return {a: dict(sorted(row.items())) for a, row in sorted(out.items())}


# ---------------------------------------------------------------------------
# Bradley-Terry fitting
# ---------------------------------------------------------------------------


def _comparison_components(speakers: list[str], trials: dict[tuple[str, str], int]) -> list[set[str]]:
    adjacency: dict[str, set[str]] = {s: set() for s in speakers}
    for (a, b), n in trials.items():
        if n > 0:
            adjacency[a].add(b)
            adjacency[b].add(a)
    components = []
    remaining = set(speakers)
    while remaining:
        seed = remaining.pop()
        component = {seed}
        frontier = [seed]
        while frontier:
            node = frontier.pop()
            for neighbor in adjacency[node]:
                if neighbor in remaining:
                    remaining.discard(neighbor)
                    component.add(neighbor)
                    frontier.append(neighbor)
        components.append(component)
    return components


def fit_btm(
    records: list[PairwiseRecord],
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> BtmResult:
    """Maximum-likelihood Bradley-Terry strengths via MM iteration.

    Returned log-strengths are shifted to sum to zero.  The comparison
    graph must be connected (an error names the components otherwise).  A
    speaker with zero wins or zero losses overall makes the MLE diverge;
    the fit is then reported with converged=False and scores clamped to
    +/-20.
    """
    if not records:
        raise ValueError("no pairwise records")
    speakers = sorted({r.speaker_a for r in records} | {r.speaker_b for r in records})
    index = {s: i for i, s in enumerate(speakers)}
    k = len(speakers)
    wins = np.zeros((k, k))
    for r in records:
        loser = r.speaker_b if r.winner == r.speaker_a else r.speaker_a
        wins[index[r.winner], index[loser]] += 1

    trials_by_pair = {}
    for i in range(k):
        for j in range(i + 1, k):
            trials_by_pair[(speakers[i], speakers[j])] = int(wins[i, j] + wins[j, i])
    components = _comparison_components(speakers, trials_by_pair)
    if len(components) > 1:
        listing = "; ".join("{" + ", ".join(sorted(c)) + "}" for c in components)
        raise ValueError(f"comparison graph is disconnected: components {listing}")

    total_wins = wins.sum(axis=1)
    total_losses = wins.sum(axis=0)
    degenerate = bool(np.any(total_wins == 0) or np.any(total_losses == 0))

    n_matrix = wins + wins.T
    active = n_matrix > 0
    scores = np.zeros(k)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        strengths = np.exp(scores)
        pair_sums = strengths[:, None] + strengths[None, :]
        denom = np.zeros(k)
        ratio = np.zeros((k, k))
        ratio[active] = n_matrix[active] / pair_sums[active]
        denom = ratio.sum(axis=1)
        with np.errstate(divide="ignore"):
            new_strengths = np.where(denom > 0, total_wins / denom, 0.0)
            new_scores = np.where(new_strengths > 0, np.log(new_strengths), -np.inf)
        new_scores = new_scores - np.mean(new_scores[np.isfinite(new_scores)])
        new_scores = np.clip(new_scores, -BTM_SCORE_CLAMP, BTM_SCORE_CLAMP)
        if np.max(np.abs(new_scores - scores)) < tol:
            scores = new_scores
            converged = True
            break
        scores = new_scores
    if degenerate:
        converged = False
    return BtmResult(
        {s: float(scores[index[s]]) for s in speakers},
        converged,
        iterations,
    )


# ---------------------------------------------------------------------------
# Welch's t-test
# ---------------------------------------------------------------------------

_BETACF_MAX_ITER = 300
_BETACF_EPS = 3e-16
_BETACF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _BETACF_EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t distribution."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return _betainc(df / 2.0, 0.5, x)


def welch_t_test(a, b) -> TTestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df.

    Both samples need n >= 2; if both sample variances vanish the statistic
    is undefined and a ValueError is raised.
    """
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if len(xa) < 2 or len(xb) < 2:
        raise ValueError("each sample needs at least 2 observations")
    va = xa.var(ddof=1)
    vb = xb.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise ValueError("both samples have zero variance; t statistic undefined")
    sa = va / len(xa)
    sb = vb / len(xb)
    se2 = sa + sb
    t = float((xa.mean() - xb.mean()) / math.sqrt(se2))
    df = float(se2**2 / (sa**2 / (len(xa) - 1) + sb**2 / (len(xb) - 1)))
    return TTestResult(t, df, student_t_two_sided_p(t, df))
