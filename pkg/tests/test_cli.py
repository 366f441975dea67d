"""CLI contracts: subcommands, exit codes, report files, determinism."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from prosodyeval.cli import main
from conftest import build_demo_corpus

RATINGS = (
    "listener,speaker,sentence,mos,judged_human\n"
    "l1,S1,sent01,5,true\n"
    "l1,S2,sent01,4,true\n"
    "l1,S3,sent01,4,false\n"
    "l1,TTSX,sent01,3,false\n"
    "l2,S1,sent02,5,true\n"
    "l2,S2,sent02,5,true\n"
    "l2,S3,sent02,3,true\n"
    "l2,TTSX,sent02,2,false\n"
    "l3,S1,sent03,4,true\n"
    "l3,TTSX,sent03,2,false\n"
)

PAIRS = (
    "listener,sentence,speaker_a,speaker_b,winner\n"
    + "\n".join(["l1,sent01,TTSX,G1,TTSX"] * 3)
    + "\n"
    + "\n".join(["l2,sent02,TTSX,G1,G1"] * 1)
    + "\n"
    + "\n".join(["l3,sent03,G1,G2,G1"] * 2)
    + "\n"
    + "\n".join(["l4,sent01,G1,G2,G2"] * 2)
    + "\n"
    + "\n".join(["l5,sent02,TTSX,G2,TTSX"] * 2)
    + "\nl6,sent03,TTSX,G2,G2\n"
)


@pytest.fixture()
def corpus_dir(tmp_path):
    return build_demo_corpus(tmp_path / "corpus", seed=99)


def read_csv(path: Path):
    with path.open() as handle:
        return list(csv.reader(handle))


class TestExtract:
    def test_success_writes_csvs(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        code = main(["extract", "--manifest", str(corpus_dir / "manifest.json"), "--out", str(out)])
        assert code == 0
        files = sorted(p.name for p in (out / "features").glob("*.csv"))
        assert len(files) == 12  # 4 speakers x 3 sentences
        assert "S1__sent01.csv" in files

    def test_missing_wav_partial_failure(self, corpus_dir, tmp_path, capsys):
        (corpus_dir / "S1_sent01.wav").unlink()
        out = tmp_path / "out"
        code = main(["extract", "--manifest", str(corpus_dir / "manifest.json"), "--out", str(out)])
        assert code == 2
        captured = capsys.readouterr()
        assert "S1" in captured.err and "sent01" in captured.err
        assert len(list((out / "features").glob("*.csv"))) == 11

    def test_bad_manifest_fatal(self, tmp_path, capsys):
        bad = tmp_path / "manifest.json"
        bad.write_text("{not json")
        code = main(["extract", "--manifest", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "error" in capsys.readouterr().err.lower()

    def test_normalized_variant(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "extract",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--out",
                str(out),
                "--normalized",
            ]
        )
        assert code == 0
        rows = read_csv(next(iter(sorted((out / "features").glob("*.csv")))))
        header, data = rows[0], rows[1:]
        column = header.index("duration_ms")
        values = [float(r[column]) for r in data if r[column]]
        assert abs(sum(values)) < 1e-6  # z-scored within the utterance


class TestEvaluate:
    def run_evaluate(self, corpus_dir, out):
        return main(
            [
                "evaluate",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--candidate",
                "TTSX",
                "--out",
                str(out),
                "--from-audio",
            ]
        )

    def test_full_run_writes_three_files(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        assert self.run_evaluate(corpus_dir, out) == 0
        for name in ("report.json", "report.csv", "radar.csv"):
            assert (out / name).exists(), name

    def test_report_csv_layout(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        self.run_evaluate(corpus_dir, out)
        rows = read_csv(out / "report.csv")
        assert rows[0] == [
            "speaker",
            "feature",
            "zero_one_loss",
            "smoothed_loss",
            "recall",
            "precision",
            "f1",
            "error",
        ]
        assert len(rows) == 1 + 6
        assert {r[1] for r in rows[1:]} == {
            "duration", "pitch", "intensity", "alpha_ratio", "l1_l0", "cpps"
        }

    def test_radar_has_complement_of_error(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        self.run_evaluate(corpus_dir, out)
        rows = read_csv(out / "radar.csv")
        assert rows[0] == ["feature", "speaker", "f1_minmax", "one_minus_error"]
        for row in rows[1:]:
            if row[3]:
                assert 0.0 <= float(row[3]) <= 1.0

    def test_unknown_candidate_fatal(self, corpus_dir, tmp_path, capsys):
        code = main(
            [
                "evaluate",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--candidate",
                "NOPE",
                "--out",
                str(tmp_path / "o"),
                "--from-audio",
            ]
        )
        assert code == 1
        assert "NOPE" in capsys.readouterr().err

    def test_byte_identical_reruns(self, corpus_dir, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        self.run_evaluate(corpus_dir, out1)
        self.run_evaluate(corpus_dir, out2)
        for name in ("report.json", "report.csv", "radar.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_report_json_round_trip(self, corpus_dir, tmp_path):
        from prosodyeval.pipeline import evaluation_from_dict, evaluation_to_dict

        out = tmp_path / "out"
        self.run_evaluate(corpus_dir, out)
        doc = json.loads((out / "report.json").read_text())
        for entry in doc["evaluations"]:
            assert evaluation_to_dict(evaluation_from_dict(entry)) == entry

    def test_evaluate_from_extracted_features(self, corpus_dir, tmp_path):
        features_out = tmp_path / "feat"
        assert main(
            ["extract", "--manifest", str(corpus_dir / "manifest.json"), "--out", str(features_out)]
        ) == 0
        out = tmp_path / "out"
        code = main(
            [
                "evaluate",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--candidate",
                "TTSX",
                "--out",
                str(out),
                "--features-dir",
                str(features_out / "features"),
            ]
        )
        assert code == 0
        assert (out / "report.json").exists()

    def test_requires_feature_source(self, corpus_dir, tmp_path, capsys):
        code = main(
            [
                "evaluate",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--candidate",
                "TTSX",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert code == 1
        assert "--from-audio" in capsys.readouterr().err


class TestSelfValidate:
    def test_writes_per_human_reports(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "self-validate",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--out",
                str(out),
                "--from-audio",
            ]
        )
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        assert [e["candidate"] for e in doc["evaluations"]] == ["S1", "S2", "S3"]
        rows = read_csv(out / "report.csv")
        assert len(rows) == 1 + 3 * 6


class TestEvents:
    def test_events_csv(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "events",
                "--manifest",
                str(corpus_dir / "manifest.json"),
                "--out",
                str(out),
                "--from-audio",
            ]
        )
        assert code == 0
        files = sorted((out / "events").glob("*.events.csv"))
        assert len(files) == 12
        rows = read_csv(files[0])
        assert rows[0] == ["word", "feature", "event"]
        assert {r[2] for r in rows[1:]} <= {"0", "1"}


class TestPerception:
    def write_inputs(self, tmp_path, ratings=RATINGS, pairs=PAIRS):
        (tmp_path / "ratings.csv").write_text(ratings)
        (tmp_path / "pairs.csv").write_text(pairs)
        return tmp_path / "ratings.csv", tmp_path / "pairs.csv"

    def test_tables_written(self, corpus_dir, tmp_path):
        ratings, pairs = self.write_inputs(tmp_path)
        out = tmp_path / "out"
        code = main(
            [
                "perception",
                "--ratings",
                str(ratings),
                "--pairs",
                str(pairs),
                "--out",
                str(out),
                "--manifest",
                str(corpus_dir / "manifest.json"),
            ]
        )
        assert code == 0
        table1 = json.loads((out / "table1.json").read_text())
        assert table1[0]["proportion"] >= table1[-1]["proportion"]
        table2 = json.loads((out / "table2.json").read_text())
        assert {row["speaker"] for row in table2} == {"S1", "S2", "S3", "TTSX"}
        table4 = json.loads((out / "table4.json").read_text())
        assert len(table4["scores"]) == 3
        ttest = json.loads((out / "ttest.json").read_text())
        assert any(row["measure"] == "mos" for row in ttest)

    def test_bad_mos_reports_row(self, tmp_path, capsys):
        ratings, pairs = self.write_inputs(
            tmp_path,
            ratings="listener,speaker,sentence,mos,judged_human\nl1,S1,sent01,7,true\n",
        )
        code = main(
            ["perception", "--ratings", str(ratings), "--pairs", str(pairs), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        assert "row 2" in capsys.readouterr().err

    def test_disconnected_pairs_fatal(self, tmp_path, capsys):
        pairs_text = (
            "listener,sentence,speaker_a,speaker_b,winner\n"
            "l1,s1,A,B,A\n"
            "l2,s2,C,D,C\n"
        )
        ratings, pairs = self.write_inputs(tmp_path, pairs=pairs_text)
        code = main(
            ["perception", "--ratings", str(ratings), "--pairs", str(pairs), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "disconnected" in err


class TestReport:
    def test_reprojects_csv(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        TestEvaluate().run_evaluate(corpus_dir, out)
        out2 = tmp_path / "again"
        code = main(
            ["report", "--report", str(out / "report.json"), "--out", str(out2)]
        )
        assert code == 0
        assert (out2 / "report.csv").read_bytes() == (out / "report.csv").read_bytes()
        assert (out2 / "radar.csv").read_bytes() == (out / "radar.csv").read_bytes()
