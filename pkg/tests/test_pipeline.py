import json

import pytest

from garden.corpus import documents_to_jsonl
from garden.errors import ConfigError
from garden.pipeline import (
    PipelineConfig,
    StageSpec,
    load_config,
    report_to_dict,
    run_pipeline,
)
from garden.registry import REGISTRY, get_operator, list_operators

from conftest import make_docs

MINIMAL = """
stages:
  - operator: filter_by_length
    params: {min_chars: 10}
"""


class TestLoadConfig:
    def test_minimal_yaml(self):
        config = load_config(MINIMAL)
        assert len(config.stages) == 1
        stage = config.stages[0]
        assert stage.operator == "filter_by_length"
        assert stage.kind == "filter"
        assert stage.params["min_chars"] == 10
        assert stage.enabled

    def test_json_detected_by_first_byte(self):
        config = load_config(b'{"stages": [{"operator": "extract_html"}], "seed": 5}')
        assert config.seed == 5
        assert config.stages[0].kind == "reformat"

    def test_unknown_operator_cites_stage(self):
        with pytest.raises(ConfigError) as err:
            load_config('{"stages": [{"operator": "no_such_op"}]}')
        assert "no_such_op" in str(err.value)

    def test_ill_typed_param_says_expected_number(self):
        bad = """
stages:
  - operator: filter_by_perplexity
    params: {model_path: m.bin, fil_ppl: three}
"""
        with pytest.raises(ConfigError) as err:
            load_config(bad)
        assert "expected number" in str(err.value)
        assert "stage 0" in str(err.value)

    def test_unknown_param_rejected(self):
        with pytest.raises(ConfigError) as err:
            load_config('{"stages": [{"operator": "filter_by_length", "params": {"mn": 1}}]}')
        assert "unknown parameter" in str(err.value)

    def test_missing_required_param(self):
        with pytest.raises(ConfigError) as err:
            load_config('{"stages": [{"operator": "filter_by_alpha_ratio"}]}')
        assert "missing required parameter" in str(err.value)

    def test_parse_error_carries_position(self):
        with pytest.raises(ConfigError) as err:
            load_config('{"stages": [oops]}')
        assert "line 1" in str(err.value)

    def test_dedup_must_be_last(self):
        bad = {
            "stages": [
                {"operator": "dedup_minhash"},
                {"operator": "filter_by_length", "params": {"min_chars": 1}},
            ]
        }
        with pytest.raises(ConfigError) as err:
            load_config(json.dumps(bad))
        assert "last" in str(err.value)

    def test_dedup_at_most_once(self):
        bad = {"stages": [{"operator": "dedup_minhash"}, {"operator": "dedup_minhash"}]}
        with pytest.raises(ConfigError) as err:
            load_config(json.dumps(bad))
        assert "one dedup" in str(err.value)

    def test_disabled_dedup_mid_list_is_fine(self):
        ok = {
            "stages": [
                {"operator": "dedup_minhash", "enabled": False},
                {"operator": "filter_by_length", "params": {"min_chars": 1}},
            ]
        }
        config = load_config(json.dumps(ok))
        assert not config.stages[0].enabled

    def test_bad_top_level_key(self):
        with pytest.raises(ConfigError):
            load_config('{"stages": [], "shards": 3}')

    def test_bad_workers(self):
        with pytest.raises(ConfigError):
            load_config('{"stages": [], "workers": 0}')

    def test_defaults(self):
        config = load_config("{}")
        assert config == PipelineConfig(stages=[], strict=False, seed=0, workers=1)


def _dummy_params(op):
    """Minimal valid params for an operator, from its schema."""
    overrides = {
        "filter_by_language": {"models": "en=a.bin,zh=b.bin", "target": "en"},
        "clean_rule": {"scope": "string", "matcher": "exact", "pattern": "x"},
    }
    params = {}
    for p in op.params:
        if not p.required:
            continue
        if p.choices:
            params[p.name] = p.choices[0]
        elif p.type is int:
            params[p.name] = 1
        elif p.type is float:
            params[p.name] = 0.5
        else:
            params[p.name] = "x"
    params.update({k: v for k, v in overrides.get(op.name, {}).items() if k in {p.name for p in op.params}})
    return params


class TestRegistry:
    def test_dedup_minhash_schema(self):
        listing = {op["name"]: op for op in list_operators()}
        params = {p["name"]: p["type"] for p in listing["dedup_minhash"]["params"]}
        assert params["ngram"] == "int"
        assert params["num_perm"] == "int"
        assert params["threshold"] == "float"

    def test_perplexity_filter_has_fil_ppl(self):
        listing = {op["name"]: op for op in list_operators()}
        names = {p["name"] for p in listing["filter_by_perplexity"]["params"]}
        assert "fil_ppl" in names

    def test_listing_alphabetical(self):
        names = [op["name"] for op in list_operators()]
        assert names == sorted(names)

    def test_every_operator_roundtrips_through_load_config(self):
        for name in REGISTRY:
            op = get_operator(name)
            config = {"stages": [{"operator": name, "params": _dummy_params(op)}]}
            loaded = load_config(json.dumps(config))
            assert loaded.stages[0].operator == name
            assert loaded.stages[0].kind == op.kind

    def test_defaults_filled_into_stage_params(self):
        config = load_config('{"stages": [{"operator": "dedup_minhash"}]}')
        assert config.stages[0].params["ngram"] == 10
        assert config.stages[0].params["num_perm"] == 128
        assert config.stages[0].params["threshold"] == 0.7


class TestRunPipeline:
    def test_empty_stage_list_is_identity(self):
        docs = make_docs(["one", "two"])
        out, report = run_pipeline(PipelineConfig(), docs)
        assert out == docs
        assert report.stages == []
        assert report.input_count == report.output_count == 2
        assert report.complete

    def test_filter_accounting(self):
        docs = make_docs(["x" * (i % 10) for i in range(100)])  # 40 docs shorter than 4
        config = load_config('{"stages": [{"operator": "filter_by_length", "params": {"min_chars": 4}}]}')
        out, report = run_pipeline(config, docs)
        stage = report.stages[0]
        assert stage.input_count == 100
        assert stage.kept + stage.dropped == 100
        assert stage.dropped == 40
        assert len(out) == 60
        assert stage.drop_reasons == {"too_short": 40}

    def test_clean_stage_drops_nothing(self):
        docs = make_docs(["keep References here", "plain"])
        config = load_config(
            json.dumps(
                {
                    "stages": [
                        {
                            "operator": "clean_rule",
                            "params": {"scope": "string", "matcher": "exact", "pattern": "References"},
                        }
                    ]
                }
            )
        )
        out, report = run_pipeline(config, docs)
        stage = report.stages[0]
        assert stage.dropped == 0
        assert stage.kept == 2
        assert stage.modified == 1
        assert len(out) == 2

    def test_order_preserved(self):
        docs = make_docs([f"document body {i}" for i in range(30)])
        config = load_config('{"stages": [{"operator": "filter_by_length", "params": {"min_chars": 1}}]}')
        out, _ = run_pipeline(config, docs)
        assert [d.id for d in out] == [d.id for d in docs]

    def test_workers_do_not_change_output(self):
        docs = make_docs([("word " * (i % 30)).strip() for i in range(300)])
        outputs = []
        for workers in (1, 4, 8):
            config = load_config(
                json.dumps(
                    {
                        "workers": workers,
                        "stages": [
                            {"operator": "filter_by_length", "params": {"min_chars": 10}},
                            {"operator": "filter_by_alpha_ratio", "params": {"min_ratio": 0.5}},
                        ],
                    }
                )
            )
            out, report = run_pipeline(config, docs)
            outputs.append(documents_to_jsonl(out))
            assert report.stages[0].kept + report.stages[0].dropped == 300
        assert outputs[0] == outputs[1] == outputs[2]

    def test_composition_equals_single_run(self):
        docs = make_docs([("tok " * (i % 25)).strip() for i in range(120)])
        stage_a = {"operator": "filter_by_length", "params": {"min_chars": 8}}
        stage_b = {"operator": "filter_by_short_lines", "params": {"short_line_max_chars": 10, "max_fraction": 0.99}}
        combined, _ = run_pipeline(load_config(json.dumps({"stages": [stage_a, stage_b]})), docs)
        first, _ = run_pipeline(load_config(json.dumps({"stages": [stage_a]})), docs)
        second, _ = run_pipeline(load_config(json.dumps({"stages": [stage_b]})), first)
        assert combined == second

    def test_dedup_stage_runs_last(self):
        text = "alpha beta gamma delta epsilon zeta eta theta iota kappa"
        docs = make_docs([text, text, "totally different words forever and ever amen ok then"])
        config = load_config(
            json.dumps(
                {
                    "seed": 11,
                    "stages": [
                        {"operator": "filter_by_length", "params": {"min_chars": 1}},
                        {"operator": "dedup_minhash"},
                    ],
                }
            )
        )
        out, report = run_pipeline(config, docs)
        assert len(out) == 2
        dedup_stage = report.stages[-1]
        assert dedup_stage.drop_reasons == {"near_duplicate": 1}
        assert len(report.clusters) == 1

    def test_rerun_counts_identical(self):
        docs = make_docs([("w " * (i % 12)).strip() for i in range(80)])
        config = load_config(MINIMAL)
        _, r1 = run_pipeline(config, docs)
        _, r2 = run_pipeline(config, docs)
        assert [(s.kept, s.dropped, s.drop_reasons) for s in r1.stages] == [
            (s.kept, s.dropped, s.drop_reasons) for s in r2.stages
        ]

    def test_perplexity_stage_prepares_threshold(self, tmp_path):
        from garden import lm

        model_path = tmp_path / "ref.bin"
        model_path.write_bytes(lm.save_model(lm.train(["the cat sat on the mat"] * 3, order=3, k=0.1)))
        docs = make_docs(["the cat sat"] * 20 + ["zz99!! qq##"])
        config = load_config(
            json.dumps(
                {
                    "seed": 3,
                    "stages": [
                        {
                            "operator": "filter_by_perplexity",
                            "params": {"model_path": str(model_path), "fil_ppl": 3.0},
                        }
                    ],
                }
            )
        )
        out, report = run_pipeline(config, docs)
        assert report.stages[0].dropped == 1
        assert report.stages[0].drop_reasons == {"perplexity_above_threshold": 1}
        assert all(d.text == "the cat sat" for d in out)

    def test_report_serializes_to_json(self):
        docs = make_docs(["abc", "de"])
        config = load_config(MINIMAL)
        _, report = run_pipeline(config, docs)
        payload = report_to_dict(report)
        text = json.dumps(payload)
        again = json.loads(text)
        assert again["input_count"] == 2
        assert again["stages"][0]["operator"] == "filter_by_length"


class TestStageSpecValidation:
    def test_kind_comes_from_registry(self):
        config = load_config(MINIMAL)
        assert config.stages[0].kind == get_operator("filter_by_length").kind

    def test_regex_compile_error_surfaces_at_load(self):
        bad = {
            "stages": [
                {
                    "operator": "clean_rule",
                    "params": {"scope": "string", "matcher": "regex", "pattern": "(oops"},
                }
            ]
        }
        with pytest.raises(ConfigError) as err:
            load_config(json.dumps(bad))
        assert "compile" in str(err.value) or "regex" in str(err.value)

    def test_choices_enforced(self):
        bad = {
            "stages": [
                {
                    "operator": "filter_by_alpha_ratio",
                    "params": {"min_ratio": 0.5, "script": "klingon"},
                }
            ]
        }
        with pytest.raises(ConfigError):
            load_config(json.dumps(bad))
