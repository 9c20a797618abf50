import json

import pytest

from garden import lm
from garden.cli import main
from garden.corpus import load_documents, write_documents

from conftest import make_docs


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def corpus_file(tmp_path):
    docs = make_docs(
        [
            "the quick brown fox jumps over the lazy dog",
            "Renmin University is a research university in Beijing",
            "short",
            "the cat sat on the mat beside the other cat",
        ]
    )
    path = tmp_path / "corpus.jsonl"
    write_documents(docs, path)
    return path


class TestUsageErrors:
    def test_missing_required_flag_exits_2(self, corpus_file):
        with pytest.raises(SystemExit) as err:
            main(["process", "--input", str(corpus_file), "--output", "x"])
        assert err.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2

    def test_no_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2


class TestProcess:
    def test_happy_path(self, tmp_path, corpus_file, capsys):
        config = tmp_path / "c.yaml"
        config.write_text(
            "seed: 7\nstages:\n  - operator: filter_by_length\n    params: {min_chars: 10}\n",
            encoding="utf-8",
        )
        report_path = tmp_path / "report.json"
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(
            capsys,
            "process",
            "--config",
            str(config),
            "--input",
            str(corpus_file),
            "--output",
            str(out_dir),
            "--report",
            str(report_path),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["input_count"] == 4
        assert payload["output_count"] == 3
        assert report_path.exists()
        refined, _ = load_documents(out_dir / "refined.jsonl")
        assert all(len(d.text) >= 10 for d in refined)

    def test_bad_config_is_operational_error(self, tmp_path, corpus_file, capsys):
        config = tmp_path / "bad.yaml"
        config.write_text("stages:\n  - operator: nope\n", encoding="utf-8")
        code, _, err = run_cli(
            capsys,
            "process",
            "--config",
            str(config),
            "--input",
            str(corpus_file),
            "--output",
            str(tmp_path / "o"),
        )
        assert code == 1
        assert "nope" in err


class TestReformat:
    def test_plain_text(self, tmp_path, capsys):
        raw = tmp_path / "raw.txt"
        raw.write_text("first block\n\nsecond block\n", encoding="utf-8")
        out = tmp_path / "out.jsonl"
        code, stdout, _ = run_cli(
            capsys, "reformat", "--input", str(raw), "--format", "plain-text", "--output", str(out)
        )
        assert code == 0
        assert json.loads(stdout)["documents"] == 2
        docs, _ = load_documents(out)
        assert [d.text for d in docs] == ["first block", "second block"]

    def test_jsonl_error_accounting(self, tmp_path, capsys):
        raw = tmp_path / "raw.jsonl"
        raw.write_text('{"text":"ok"}\nnot json\n', encoding="utf-8")
        out = tmp_path / "out.jsonl"
        code, stdout, _ = run_cli(
            capsys, "reformat", "--input", str(raw), "--format", "jsonl", "--output", str(out)
        )
        assert code == 0
        payload = json.loads(stdout)
        assert payload["documents"] == 1
        assert len(payload["errors"]) == 1
        assert payload["errors"][0]["kind"] == "malformed-json"


class TestAnalyze:
    def test_stats_json_on_stdout(self, corpus_file, capsys):
        code, out, _ = run_cli(capsys, "analyze", "--input", str(corpus_file))
        assert code == 0
        payload = json.loads(out)
        assert payload["doc_count"] == 4
        assert payload["length"]["count"] == 4

    def test_deterministic_across_runs(self, corpus_file, capsys):
        _, first, _ = run_cli(capsys, "analyze", "--input", str(corpus_file), "--seed", "3")
        _, second, _ = run_cli(capsys, "analyze", "--input", str(corpus_file), "--seed", "3")
        assert first == second

    def test_with_lm(self, tmp_path, corpus_file, capsys):
        model_path = tmp_path / "m.bin"
        run_cli(
            capsys, "lm", "train", "--input", str(corpus_file), "--order", "3", "--out", str(model_path)
        )
        code, out, _ = run_cli(capsys, "analyze", "--input", str(corpus_file), "--lm", str(model_path))
        assert code == 0
        assert json.loads(out)["perplexity"]["count"] == 4


class TestLmTrain:
    def test_train_writes_model(self, tmp_path, corpus_file, capsys):
        model_path = tmp_path / "model.bin"
        code, out, _ = run_cli(
            capsys,
            "lm",
            "train",
            "--input",
            str(corpus_file),
            "--order",
            "5",
            "--k",
            "0.1",
            "--out",
            str(model_path),
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["order"] == 5
        loaded = lm.load_model(model_path.read_bytes())
        assert loaded.order == 5
        assert loaded.k == 0.1


class TestDedupCommand:
    def test_dedup_writes_survivors_and_clusters(self, tmp_path, capsys):
        text = "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu"
        docs = make_docs([text, text, "other words entirely unrelated to anything else at all"])
        src = tmp_path / "in.jsonl"
        write_documents(docs, src)
        out = tmp_path / "out.jsonl"
        clusters_path = tmp_path / "clusters.json"
        code, stdout, _ = run_cli(
            capsys,
            "dedup",
            "--input",
            str(src),
            "--output",
            str(out),
            "--clusters",
            str(clusters_path),
            "--seed",
            "5",
        )
        assert code == 0
        report = json.loads(stdout)
        assert report["kept"] == 2
        clusters = json.loads(clusters_path.read_text(encoding="utf-8"))
        assert len(clusters) == 1
        assert clusters[0]["size"] == 2
        assert set(clusters[0]) == {"representative", "members", "size", "pair_estimates"}


class TestIndexAndSearch:
    def test_build_then_search(self, tmp_path, corpus_file, capsys):
        idx = tmp_path / "idx"
        code, out, _ = run_cli(
            capsys, "index", "build", "--input", str(corpus_file), "--shards", "20", "--out", str(idx)
        )
        assert code == 0
        assert json.loads(out)["num_shards"] == 20
        code, out, _ = run_cli(
            capsys, "search", "--index", str(idx), "--query", "renmin university", "--topk", "3"
        )
        assert code == 0
        hits = json.loads(out)["hits"]
        assert hits
        assert "[[Renmin]]" in hits[0]["snippet"]


class TestDebugCommands:
    def test_sweep_json(self, corpus_file, capsys):
        code, out, _ = run_cli(
            capsys,
            "debug",
            "sweep",
            "--input",
            str(corpus_file),
            "--filter",
            "filter_by_length",
            "--param",
            "min_chars",
            "--values",
            "0,10,100",
            "--sample",
            "10",
            "--seed",
            "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["param_name"] == "min_chars"
        assert payload["filter_ratios"] == sorted(payload["filter_ratios"])

    def test_sweep_same_seed_identical(self, corpus_file, capsys):
        argv = [
            "debug", "sweep", "--input", str(corpus_file), "--filter", "filter_by_length",
            "--param", "min_chars", "--values", "5,15", "--sample", "3", "--seed", "9",
        ]
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second

    def test_clean_preview(self, corpus_file, capsys):
        code, out, _ = run_cli(
            capsys,
            "debug",
            "clean-preview",
            "--input",
            str(corpus_file),
            "--scope",
            "string",
            "--matcher",
            "exact",
            "--pattern",
            "university",
            "--sample",
            "10",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["total_matches"] == 1
        assert payload["cases"][0]["context"]


class TestOperators:
    def test_listing(self, capsys):
        code, out, _ = run_cli(capsys, "operators")
        assert code == 0
        names = [op["name"] for op in json.loads(out)]
        assert "dedup_minhash" in names
        assert "filter_by_perplexity" in names
