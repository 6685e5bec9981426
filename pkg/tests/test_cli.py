"""End-to-end tests of the command-line surface."""

import json

import numpy as np
import pytest

from ambigeo.cli import main
from ambigeo.embedstore import (
    SenseLabeling,
    write_embv1_file,
    write_labels_file,
)
from ambigeo.geometry import DiversityRecord, write_diversity_csv
from ambigeo.synthkit import ClusterSpec, gen_cluster_set


@pytest.fixture
def two_cluster_files(tmp_path):
    """EMBV1 + label JSONL for a well-separated two-cluster word."""
    data = gen_cluster_set(ClusterSpec(2, 60, 16, 0.6, 0.1, seed=0), word="bark")
    emb_path = tmp_path / "bark.emb"
    write_embv1_file(data.set, emb_path)
    labeling = SenseLabeling(
        "bark", "auto-translation", dict(zip(data.set.context_ids, data.labels))
    )
    labels_path = tmp_path / "bark.labels.jsonl"
    write_labels_file(labeling, labels_path)
    return emb_path, labels_path


class TestWindowsCommand:
    def _corpus(self, tmp_path):
        corpus_dir = tmp_path / "corpus"
        corpus_dir.mkdir()
        (corpus_dir / "doc1.txt").write_text(
            "The bark was rough. Dogs bark at night. The tree stood tall.",
            encoding="utf-8",
        )
        (corpus_dir / "doc2.txt").write_text(
            "No target here. Nothing to see.", encoding="utf-8"
        )
        targets = tmp_path / "targets.txt"
        targets.write_text("bark\n", encoding="utf-8")
        return corpus_dir, targets

    def test_writes_windows_and_manifest(self, tmp_path):
        corpus_dir, targets = self._corpus(tmp_path)
        out = tmp_path / "windows.jsonl"
        code = main(
            ["windows", "--corpus", str(corpus_dir), "--targets", str(targets),
             "--size", "10", "--out", str(out)]
        )
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 2
        assert {row["target"] for row in rows} == {"bark"}
        manifest = json.loads((tmp_path / "windows.jsonl.manifest.json").read_text())
        assert manifest["command"] == "windows"
        assert len(manifest["input_digests"]) == 3  # two docs + targets

    def test_pre_segmented(self, tmp_path):
        corpus_dir = tmp_path / "pre"
        corpus_dir.mkdir()
        (corpus_dir / "d.txt").write_text("first bark line\nsecond line\n", encoding="utf-8")
        targets = tmp_path / "t.txt"
        targets.write_text("bark\n")
        out = tmp_path / "w.jsonl"
        code = main(
            ["windows", "--corpus", str(corpus_dir), "--targets", str(targets),
             "--size", "4", "--pre-segmented", "--out", str(out)]
        )
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert rows[0]["sentence_span"] == [0, 0]

    def test_missing_corpus_dir(self, tmp_path):
        targets = tmp_path / "t.txt"
        targets.write_text("x\n")
        code = main(
            ["windows", "--corpus", str(tmp_path / "nope"), "--targets", str(targets),
             "--out", str(tmp_path / "w.jsonl")]
        )
        assert code == 2


class TestDiversityCommand:
    def test_table_over_directory(self, tmp_path):
        emb_dir = tmp_path / "embs"
        emb_dir.mkdir()
        for word, seed in (("alpha", 1), ("beta", 2)):
            data = gen_cluster_set(ClusterSpec(2, 10, 8, 0.5, 0.1, seed=seed), word=word)
            write_embv1_file(data.set, emb_dir / f"{word}.emb")
        out = tmp_path / "div.csv"
        assert main(["diversity", "--embeddings", str(emb_dir), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "word,context_count,diversity"
        assert len(lines) == 3

    def test_empty_dir_is_user_error(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main(["diversity", "--embeddings", str(empty), "--out", str(tmp_path / "o.csv")]) == 2


class TestSimulateCommand:
    def _write_fixture(self, tmp_path, with_meanings=True):
        rng = np.random.default_rng(0)
        records = []
        rows = ["word,condition,n_senses" + (",n_meanings" if with_meanings else "")]
        for i in range(40):
            senses = int(rng.integers(1, 12))
            meanings = int(rng.integers(1, 4))
            diversity = 0.05 * senses + rng.normal(0, 0.02) + 0.1
            records.append(DiversityRecord(f"w{i}", 50, float(diversity)))
            condition = "many" if senses > 6 else "few"
            row = f"w{i},{condition},{senses}"
            if with_meanings:
                row += f",{meanings}"
            rows.append(row)
        div_path = tmp_path / "div.csv"
        with open(div_path, "w", newline="\n") as sink:
            write_diversity_csv(records, sink)
        cond_path = tmp_path / "cond.csv"
        cond_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        return div_path, cond_path

    def test_regression_recovers_slope(self, tmp_path):
        div_path, cond_path = self._write_fixture(tmp_path)
        out = tmp_path / "stats.json"
        code = main(
            ["simulate", "--diversity", str(div_path), "--conditions", str(cond_path),
             "--design", "regression", "--out", str(out)]
        )
        assert code == 0
        result = json.loads(out.read_text())
        fit = result["ols"]
        senses_idx = fit["predictors"].index("n_senses")
        assert fit["coefficients"][senses_idx] > 0
        assert fit["p_values"][senses_idx] < 0.01

    def test_factorial_schema(self, tmp_path):
        div_path, cond_path = self._write_fixture(tmp_path)
        out = tmp_path / "stats.json"
        code = main(
            ["simulate", "--diversity", str(div_path), "--conditions", str(cond_path),
             "--design", "factorial", "--out", str(out)]
        )
        assert code == 0
        result = json.loads(out.read_text())
        for key in ("f_value", "df_between", "df_within", "p_value", "partial_eta_sq"):
            assert key in result["overall"]

    def test_absent_word_exits_2(self, tmp_path):
        div_path, cond_path = self._write_fixture(tmp_path)
        cond_path.write_text("word,condition,n_senses\nghost,few,2\n", encoding="utf-8")
        code = main(
            ["simulate", "--diversity", str(div_path), "--conditions", str(cond_path),
             "--design", "factorial", "--out", str(tmp_path / "o.json")]
        )
        assert code == 2


class TestCasestudyCommand:
    def _run(self, emb, labels, out_dir, extra=()):
        return main(
            ["casestudy", "--embeddings", str(emb), "--labels", str(labels),
             "--tsne-perplexity", "10", "--tsne-iterations", "300",
             "--tsne-learning-rate", "50", "--tsne-exaggeration", "1",
             "--seed", "0", "--knn", "3", "--test-fraction", "0.5",
             "--out-dir", str(out_dir), *extra]
        )

    def test_outputs_and_accuracy(self, two_cluster_files, tmp_path):
        emb, labels = two_cluster_files
        out_dir = tmp_path / "case"
        assert self._run(emb, labels, out_dir) == 0
        for name in (
            "tsne.csv", "kl.csv", "proxigram.svg", "proxigram.json",
            "groupsim.json", "pairs.csv", "classify.json", "manifest.json",
        ):
            assert (out_dir / name).exists(), name
        classify = json.loads((out_dir / "classify.json").read_text())
        assert classify["accuracy"] >= 0.99
        groupsim = json.loads((out_dir / "groupsim.json").read_text())
        assert groupsim["within_mean"] > groupsim["between_mean"]

    def test_rerun_byte_identical_svg(self, two_cluster_files, tmp_path):
        emb, labels = two_cluster_files
        first = tmp_path / "case1"
        second = tmp_path / "case2"
        assert self._run(emb, labels, first) == 0
        assert self._run(emb, labels, second) == 0
        assert (first / "proxigram.svg").read_bytes() == (second / "proxigram.svg").read_bytes()
        assert (first / "tsne.csv").read_bytes() == (second / "tsne.csv").read_bytes()

    def test_single_label_exits_2(self, tmp_path):
        data = gen_cluster_set(ClusterSpec(1, 20, 8, 1.0, 0.1, seed=1), word="flat")
        emb_path = tmp_path / "flat.emb"
        write_embv1_file(data.set, emb_path)
        labels_path = tmp_path / "flat.labels.jsonl"
        write_labels_file(
            SenseLabeling("flat", "auto-translation",
                          dict(zip(data.set.context_ids, data.labels))),
            labels_path,
        )
        assert self._run(emb_path, labels_path, tmp_path / "out") == 2

    def test_too_few_shared_contexts_exits_2(self, two_cluster_files, tmp_path):
        emb, _ = two_cluster_files
        data = gen_cluster_set(ClusterSpec(2, 60, 16, 0.6, 0.1, seed=0), word="bark")
        sparse = SenseLabeling(
            "bark", "auto-translation",
            {cid: label for cid, label in list(zip(data.set.context_ids, data.labels))[:5]},
        )
        labels_path = tmp_path / "sparse.jsonl"
        write_labels_file(sparse, labels_path)
        assert self._run(emb, labels_path, tmp_path / "out") == 2

    def test_stratified_flag(self, two_cluster_files, tmp_path):
        emb, labels = two_cluster_files
        out_dir = tmp_path / "strat"
        assert self._run(emb, labels, out_dir, extra=("--stratify",)) == 0
        classify = json.loads((out_dir / "classify.json").read_text())
        assert classify["stratified"] is True


class TestAgreementCommand:
    def _write(self, tmp_path, name, values, source):
        path = tmp_path / f"{name}.jsonl"
        labeling = SenseLabeling(
            "bark", source, {f"c{i}": v for i, v in enumerate(values)}
        )
        write_labels_file(labeling, path)
        return path

    def test_report_and_majority(self, tmp_path):
        auto = self._write(tmp_path, "auto", ["A", "B", "A", "B"], "auto-translation")
        r1 = self._write(tmp_path, "r1", ["A", "B", "A", "B"], "rater:1")
        r2 = self._write(tmp_path, "r2", ["A", "B", "A", "A"], "rater:2")
        r3 = self._write(tmp_path, "r3", ["A", "B", "other", "B"], "rater:3")
        out = tmp_path / "agreement.json"
        majority_out = tmp_path / "majority.jsonl"
        code = main(
            ["agreement", "--auto", str(auto), "--rater", str(r1), "--rater", str(r2),
             "--rater", str(r3), "--min-agree", "2", "--out", str(out),
             "--majority-out", str(majority_out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["pairwise"]["rater:1"] == 1.0
        assert 0 < report["average"] <= 1.0
        assert report["majority_retained"] == 4
        assert majority_out.exists()

    def test_majority_needs_enough_raters(self, tmp_path):
        auto = self._write(tmp_path, "auto", ["A", "B"], "auto-translation")
        r1 = self._write(tmp_path, "r1", ["A", "B"], "rater:1")
        code = main(
            ["agreement", "--auto", str(auto), "--rater", str(r1), "--min-agree", "2",
             "--out", str(tmp_path / "o.json"),
             "--majority-out", str(tmp_path / "m.jsonl")]
        )
        assert code == 2


class TestSynthCommand:
    def test_runs_and_writes(self, tmp_path):
        config = {
            "seed": 0,
            "words_per_condition": 5,
            "profiles": {
                "unambiguous": {
                    "n_clusters": 1, "points_per_cluster": 30, "dim": 16,
                    "centre_separation": 1.0, "within_spread": 0.1,
                },
                "homonym": {
                    "n_clusters": 2, "points_per_cluster": 15, "dim": 16,
                    "centre_separation": 0.6, "within_spread": 0.1,
                },
            },
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config), encoding="utf-8")
        out_dir = tmp_path / "synth"
        assert main(["synth", "--config", str(config_path), "--out-dir", str(out_dir)]) == 0
        stats_doc = json.loads((out_dir / "stats.json").read_text())
        assert stats_doc["condition_means"]["homonym"] > stats_doc["condition_means"]["unambiguous"]
        lines = (out_dir / "diversity.csv").read_text().splitlines()
        assert len(lines) == 1 + 10

    def test_bad_config_exits_2(self, tmp_path):
        config_path = tmp_path / "bad.json"
        config_path.write_text('{"profiles": {}}', encoding="utf-8")
        assert main(["synth", "--config", str(config_path), "--out-dir", str(tmp_path / "o")]) == 2


class TestManifests:
    def test_rerun_reproduces_output_digests(self, two_cluster_files, tmp_path):
        emb, labels = two_cluster_files
        digests = []
        for name in ("m1", "m2"):
            out_dir = tmp_path / name
            code = main(
                ["casestudy", "--embeddings", str(emb), "--labels", str(labels),
                 "--tsne-perplexity", "10", "--tsne-iterations", "260",
                 "--tsne-exaggeration", "1", "--seed", "0",
                 "--out-dir", str(out_dir)]
            )
            assert code == 0
            manifest = json.loads((out_dir / "manifest.json").read_text())
            digests.append(manifest["output_digests"])
        assert digests[0] == digests[1]


class TestThreadsFlag:
    def test_env_var_mirrors_flag(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AMBIGEO_THREADS", "3")
        emb_dir = tmp_path / "embs"
        emb_dir.mkdir()
        data = gen_cluster_set(ClusterSpec(2, 10, 8, 0.5, 0.1, seed=1), word="w")
        write_embv1_file(data.set, emb_dir / "w.emb")
        out = tmp_path / "d.csv"
        assert main(["diversity", "--embeddings", str(emb_dir), "--out", str(out)]) == 0
        assert out.exists()

    def test_outputs_identical_for_any_thread_count(self, two_cluster_files, tmp_path):
        emb, labels = two_cluster_files
        outputs = []
        for threads in ("1", "4"):
            out_dir = tmp_path / f"t{threads}"
            code = main(
                ["casestudy", "--embeddings", str(emb), "--labels", str(labels),
                 "--tsne-perplexity", "10", "--tsne-iterations", "260",
                 "--tsne-exaggeration", "1", "--seed", "0",
                 "--out-dir", str(out_dir), "--threads", threads]
            )
            assert code == 0
            outputs.append((out_dir / "tsne.csv").read_bytes())
        assert outputs[0] == outputs[1]
