"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -s`` to see them).

Each criterion pins its tolerance explicitly and checks the implementation
against an independent oracle: literal-definition re-implementations for the
metric and peak-detection equivalences, closed forms for the smoothed
correctness / normalized error / Bradley-Terry / Welch values, constructed
signals with known ground truth for the DSP checks, and byte comparison plus
a mutation fuzz corpus for the CLI robustness contract.
"""

from __future__ import annotations

import itertools
import math
import statistics
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from prosodyeval.binary import score_events, smoothed_correctness
from prosodyeval.cli import main
from prosodyeval.continuous import build_reference, normalized_error
from prosodyeval.corpus import AudioBuffer
from prosodyeval.events import PeakConfig, detect_peaks, median_threshold
from prosodyeval.features import AnalysisConfig, compute_cpps, estimate_f0, frame_intensity, spectral_band_measures
from prosodyeval.perception import fit_btm, welch_t_test
from prosodyeval.pipeline import compare_groups, evaluate_candidate, self_validate

from conftest import build_demo_corpus
from test_perception import grid_search_btm, pair
from test_pipeline import build_synthetic_corpus

GOLDEN_DIR = Path(__file__).parent / "golden"


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


# ---------------------------------------------------------------------------
# 1. Smoothed-correctness closed form
# ---------------------------------------------------------------------------


def test_smoothed_correctness_closed_form():
    with criterion("smoothed correctness closed form"):
        eps = smoothed_correctness(np.array([0.0, 0.25, 0.5]))
        assert eps[0] == 1.0
        assert abs(eps[1] - math.exp(-math.pi**2)) <= 1e-12 * math.exp(-math.pi**2)
        assert abs(eps[2] - math.exp(-4 * math.pi**2)) <= 1e-12 * math.exp(-4 * math.pi**2)


# ---------------------------------------------------------------------------
# 2. Binary-metric oracle equivalence (exhaustive n <= 4, m <= 3)
# ---------------------------------------------------------------------------


def literal_binary_metrics(p, refs, c=0.5):
    n, m = len(p), len(refs)
    alpha = [sum(1 for s in refs if s[i] == p[i]) / m for i in range(n)]
    loss01 = sum(1 for a in alpha if a < c) / n
    smoothed = sum(math.exp(-((4 * math.pi * a) ** 2)) for a in alpha) / n
    hits = sum(1 for i in range(n) if p[i] == 1 and alpha[i] >= c)
    n_pred = sum(p)
    majority = sum(1 for i in range(n) if sum(s[i] for s in refs) / m >= c)
    precision = hits / n_pred if n_pred else None
    recall = hits / majority if majority else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return loss01, smoothed, precision, recall, f1


def test_binary_metric_oracle_equivalence():
    with criterion("binary metrics match literal definitions exhaustively (n<=4, m<=3)"):
        checked = 0
        for n in range(1, 5):
            for m in range(1, 4):
                for p in itertools.product((0, 1), repeat=n):
                    p = list(p)
                    for flat in itertools.product((0, 1), repeat=n * m):
                        refs = [list(flat[j * n : (j + 1) * n]) for j in range(m)]
                        expected = literal_binary_metrics(p, refs)
                        score = score_events(p, refs, 0.5)
                        got = (
                            score.zero_one_loss,
                            score.smoothed_loss,
                            score.precision,
                            score.recall,
                            score.f1,
                        )
                        assert got == expected, (p, refs, got, expected)
                        checked += 1
        assert checked == sum(2 ** (n * (m + 1)) for n in range(1, 5) for m in range(1, 4))


# ---------------------------------------------------------------------------
# 3. Peak-detection oracle equivalence (exhaustive length <= 8 over {0,1,2,3})
# ---------------------------------------------------------------------------


def literal_threshold(x, window=7, rho_mult=0.5):
    n = len(x)
    mean = sum(x) / n
    rho = rho_mult * math.sqrt(sum((v - mean) ** 2 for v in x) / n)
    half = window // 2
    return [
        rho + statistics.median(x[max(0, i - half) : min(n, i + half + 1)])
        for i in range(n)
    ]


def literal_peaks(x, thresholds):
    n = len(x)
    return [
        int(
            x[i] > thresholds[i]
            and (i == 0 or x[i] > x[i - 1])
            and (i == n - 1 or x[i] > x[i + 1])
        )
        for i in range(n)
    ]


def test_peak_detection_oracle_equivalence():
    with criterion("peak detection matches brute force exhaustively (len<=8, values 0..3)"):
        cfg = PeakConfig()
        for n in range(1, 9):
            for combo in itertools.product((0.0, 1.0, 2.0, 3.0), repeat=n):
                x = np.array(combo)
                expected_t = literal_threshold(list(combo))
                got_t = median_threshold(x, cfg)
                assert got_t.tolist() == expected_t, combo
                expected_bits = literal_peaks(list(combo), expected_t)
                assert detect_peaks(x, cfg=cfg).bits.astype(int).tolist() == expected_bits, combo


# ---------------------------------------------------------------------------
# 4. Normalized-error analytic cases
# ---------------------------------------------------------------------------


def test_normalized_error_analytic_cases():
    with criterion("normalized error analytic cases (mean -> 0, mean+std -> 1)"):
        rng = np.random.default_rng(2718)
        refs = [rng.normal(2.0, 3.0, size=40) for _ in range(5)]
        ref = build_reference(refs)
        assert ref.scorable.all()
        assert abs(normalized_error(ref.mean, None, ref)) <= 1e-12
        assert abs(normalized_error(ref.mean + ref.std, None, ref) - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# 5. Self-validation sanity on a synthetic speaker group
# ---------------------------------------------------------------------------


def test_self_validation_separates_impostor():
    with criterion("self-validation: consistent speakers < 0.01 loss, impostor > 0.05 and loses t-tests"):
        fc = build_synthetic_corpus(
            seed=31415, n_sentences=20, n_words=30, sigma=0.2, with_impostor=True
        )
        human_evals = self_validate(fc)
        for ev in human_evals:
            for report in ev.reports:
                assert report.smoothed_loss < 0.01, (ev.candidate_id, report.feature)
        impostor = evaluate_candidate(fc, "imp")
        for report in impostor.reports:
            assert report.smoothed_loss > 0.05, report.feature
        rows = compare_groups(
            human_evals,
            [impostor],
            metrics=("smoothed_loss", "f1", "normalized_error"),
            label_a="group",
            label_b="impostor",
        )
        assert rows
        for row in rows:
            assert row.winner == "group", (row.feature, row.metric)
            assert row.p < 0.01, (row.feature, row.metric, row.p)


# ---------------------------------------------------------------------------
# 6. DSP ground truth
# ---------------------------------------------------------------------------


def test_dsp_ground_truth():
    with criterion("DSP ground truth: F0 0.5%, sine -3.01 dBFS, flat-noise alpha, CPPS margin"):
        cfg = AnalysisConfig()
        sr = 16000
        t = np.arange(sr) / sr
        for freq in (110.0, 220.0, 440.0):
            track = estimate_f0(AudioBuffer(np.sin(2 * np.pi * freq * t), sr), cfg)
            voiced = track.values[track.voiced_mask]
            assert len(voiced) > 0
            assert np.abs(voiced - freq).max() / freq <= 0.005, freq

        intensity = frame_intensity(AudioBuffer(np.sin(2 * np.pi * 220 * t), sr), cfg)
        assert np.abs(intensity.values - (-3.01)).max() <= 0.05

        rng = np.random.default_rng(8675309)
        noise = rng.standard_normal(sr)
        noise /= np.abs(noise).max()
        alpha, _ = spectral_band_measures(AudioBuffer(noise, sr), cfg)
        assert abs(alpha.values[alpha.voiced_mask].mean() - 6.24) <= 1.0

        period = int(round(sr / 150))
        pulse = np.zeros(sr)
        pulse[::period] = 1.0
        pulse = 0.1 * pulse / np.sqrt((pulse**2).mean())
        white = rng.standard_normal(sr)
        white = 0.1 * white / np.sqrt((white**2).mean())
        cpps_pulse = compute_cpps(AudioBuffer(pulse, sr), cfg)
        cpps_white = compute_cpps(AudioBuffer(white, sr), cfg)
        margin = (
            cpps_pulse.values[cpps_pulse.voiced_mask].mean()
            - cpps_white.values[cpps_white.voiced_mask].mean()
        )
        assert margin >= 5.0


# ---------------------------------------------------------------------------
# 7. Bradley-Terry closed form and grid-search oracle
# ---------------------------------------------------------------------------


def test_btm_closed_form_and_grid_oracle():
    with criterion("Bradley-Terry: 3:1 closed form within 1e-6, grid oracle within 1e-4"):
        records = [pair("A", "B", "A")] * 3 + [pair("A", "B", "B")]
        result = fit_btm(records)
        assert abs(result.scores["A"] - math.log(3) / 2) <= 1e-6
        assert abs(result.scores["B"] + math.log(3) / 2) <= 1e-6

        rng = np.random.default_rng(5150)
        speakers = ["A", "B", "C"]
        true = {"A": 0.9, "B": -0.1, "C": -0.8}
        synthetic = []
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = speakers[i], speakers[j]
                p_a = 1 / (1 + math.exp(-(true[a] - true[b])))
                for k in range(150):
                    synthetic.append(pair(a, b, a if rng.random() < p_a else b, listener=f"l{k}"))
        fitted = fit_btm(synthetic)
        oracle = grid_search_btm(synthetic, speakers)
        for s in speakers:
            assert abs(fitted.scores[s] - oracle[s]) <= 1e-4, s


# ---------------------------------------------------------------------------
# 8. Welch t-test reference values
# ---------------------------------------------------------------------------


def test_welch_reference_values():
    with criterion("Welch t-test reference: t=-1.2247, df=4.0, p=0.288"):
        result = welch_t_test([1, 2, 3], [2, 3, 4])
        assert abs(result.t - (-1.2247)) <= 1e-4
        assert abs(result.df - 4.0) <= 1e-6
        assert abs(result.p - 0.288) <= 1e-3


# ---------------------------------------------------------------------------
# 9. Determinism and robustness (fuzz corpus)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def fuzz_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("fuzz_base")
    build_demo_corpus(root / "tiny", seed=5)
    return root / "tiny"


def test_determinism_of_evaluate(tmp_path, fuzz_corpus):
    with criterion("repeated evaluate runs are byte-identical"):
        outputs = []
        for name in ("one", "two"):
            out = tmp_path / name
            code = main(
                [
                    "evaluate",
                    "--manifest",
                    str(fuzz_corpus / "manifest.json"),
                    "--candidate",
                    "TTSX",
                    "--out",
                    str(out),
                    "--from-audio",
                ]
            )
            assert code == 0
            outputs.append(out)
        for name in ("report.json", "report.csv", "radar.csv"):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()


def _mutants(data: bytes, rng: np.random.Generator, structured: list[bytes]) -> list[tuple[str, bytes]]:
    out = [("truncate", data[: max(1, int(rng.integers(1, max(2, len(data)))))]) for _ in range(8)]
    out += [("structured", s) for s in structured]
    for _ in range(10):
        flipped = bytearray(data)
        for _ in range(int(rng.integers(1, 6))):
            pos = int(rng.integers(0, min(len(flipped), 400)))
            flipped[pos] ^= int(rng.integers(1, 255))
        out.append(("byteflip", bytes(flipped)))
    return out


def test_fuzzed_inputs_never_crash(tmp_path, fuzz_corpus):
    with criterion("fuzz corpus (>=100 mutants): exit codes stay in contract, no crash"):
        rng = np.random.default_rng(1337)
        ratings_ok = (
            "listener,speaker,sentence,mos,judged_human\n"
            "l1,S1,sent01,5,true\nl1,S2,sent01,4,false\nl2,S1,sent02,3,true\nl2,S2,sent02,2,false\n"
        ).encode()
        pairs_ok = (
            "listener,sentence,speaker_a,speaker_b,winner\n"
            "l1,sent01,S1,S2,S1\nl2,sent02,S1,S2,S2\nl3,sent01,S1,S2,S1\n"
        ).encode()

        wav_bytes = (fuzz_corpus / "S1_sent01.wav").read_bytes()
        grid_bytes = (fuzz_corpus / "S1_sent01.TextGrid").read_bytes()
        manifest_bytes = (fuzz_corpus / "manifest.json").read_bytes()

        total = 0
        strict_failures = 0
        cases = (
            [("wav", kind, payload) for kind, payload in _mutants(
                wav_bytes, rng, [b"RIFX" + wav_bytes[4:], wav_bytes[:40], b""]
            )]
            + [("textgrid", kind, payload) for kind, payload in _mutants(
                grid_bytes, rng, [grid_bytes.replace(b"IntervalTier", b"PointTier"), b"not a grid", b""]
            )]
            + [("manifest", kind, payload) for kind, payload in _mutants(
                manifest_bytes, rng, [manifest_bytes[:-20], b"{", b"[]"]
            )]
            + [("ratings", kind, payload) for kind, payload in _mutants(
                ratings_ok, rng, [b"listener,speaker\n1,2\n", ratings_ok.replace(b",5,", b",9,"), b""]
            )]
            + [("pairs", kind, payload) for kind, payload in _mutants(
                pairs_ok, rng, [pairs_ok.replace(b",S1\n", b",S9\n"), b"x", b""]
            )]
        )
        assert len(cases) >= 100
        for index, (target, kind, payload) in enumerate(cases):
            workdir = tmp_path / f"case{index}"
            workdir.mkdir()
            if target in ("wav", "textgrid", "manifest"):
                corpus = workdir / "corpus"
                import shutil

                shutil.copytree(fuzz_corpus, corpus)
                victim = {
                    "wav": corpus / "S1_sent01.wav",
                    "textgrid": corpus / "S1_sent01.TextGrid",
                    "manifest": corpus / "manifest.json",
                }[target]
                victim.write_bytes(payload)
                code = main(
                    [
                        "extract",
                        "--manifest",
                        str(corpus / "manifest.json"),
                        "--out",
                        str(workdir / "out"),
                    ]
                )
            else:
                ratings_path = workdir / "ratings.csv"
                pairs_path = workdir / "pairs.csv"
                ratings_path.write_bytes(payload if target == "ratings" else ratings_ok)
                pairs_path.write_bytes(payload if target == "pairs" else pairs_ok)
                code = main(
                    [
                        "perception",
                        "--ratings",
                        str(ratings_path),
                        "--pairs",
                        str(pairs_path),
                        "--out",
                        str(workdir / "out"),
                    ]
                )
            total += 1
            assert code in (0, 1, 2), (target, kind, code)
            if kind in ("truncate", "structured") and payload != wav_bytes:
                # engineered corruption must be rejected, not silently accepted
                if code == 0:
                    strict_failures += 1
        assert total >= 100
        assert strict_failures == 0


# ---------------------------------------------------------------------------
# 10. Report fidelity (golden column layout)
# ---------------------------------------------------------------------------


def test_report_csv_matches_golden_layout(tmp_path, fuzz_corpus):
    with criterion("report.csv matches the golden column layout"):
        out = tmp_path / "out"
        code = main(
            [
                "evaluate",
                "--manifest",
                str(fuzz_corpus / "manifest.json"),
                "--candidate",
                "TTSX",
                "--out",
                str(out),
                "--from-audio",
            ]
        )
        assert code == 0
        golden_header = (GOLDEN_DIR / "report_header.csv").read_text().strip()
        lines = (out / "report.csv").read_text().splitlines()
        assert lines[0] == golden_header
        assert len(lines) == 1 + 6
        for line in lines[1:]:
            cells = line.split(",")
            assert len(cells) == 8
            assert cells[0] == "TTSX"
            for cell in cells[2:]:
                assert cell == "" or math.isfinite(float(cell))
