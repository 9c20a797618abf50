"""Unified command line: thin dispatch over the same operations the API serves.

All machine output (JSON or JSONL) goes to stdout, logs to stderr. Exit
codes: 0 success, 1 operational error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analyzer, dedup, lm, ops, pipeline, registry, retriever
from .cleaners import CleanRule
from .corpus import load_documents, reformat_stream, write_documents
from .errors import GardenError

log = logging.getLogger("garden")


def _emit(payload) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def _write_json(path: str | None, payload) -> None:
    if path:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")


def _load_lang_models(spec: str | None):
    return registry.load_language_models(spec) if spec else None


def _cmd_reformat(args) -> int:
    src = Path(args.input)
    if src.is_dir():
        files = sorted(p for p in src.iterdir() if p.is_file())
    else:
        files = [src]
    docs = []
    errors = []
    for f in files:
        got, errs = reformat_stream(f.read_bytes(), args.format, source=f.stem, strict=args.strict)
        docs.extend(got)
        errors.extend(errs)
    write_documents(docs, args.output)
    _emit(
        {
            "documents": len(docs),
            "errors": [
                {"line_number": e.line_number, "kind": e.kind, "detail": e.detail} for e in errors
            ],
            "output": str(args.output),
        }
    )
    return 0


def _cmd_process(args) -> int:
    config = pipeline.load_config_file(args.config)
    docs, record_errors = load_documents(args.input, strict=config.strict)
    refined, report = pipeline.run_pipeline(config, docs)
    out = Path(args.output)
    out_file = out if out.suffix == ".jsonl" else out / "refined.jsonl"
    write_documents(refined, out_file)
    payload = pipeline.report_to_dict(report)
    payload["record_errors"] = len(record_errors)
    payload["output"] = str(out_file)
    _write_json(args.report, payload)
    _emit(payload)
    return 0


def _cmd_analyze(args) -> int:
    docs, _ = load_documents(args.input)
    model = registry.load_model_path(args.lm) if args.lm else None
    payload = ops.stats_payload(
        docs,
        model=model,
        lang_models=_load_lang_models(args.lang_models),
        bins=args.bins,
        seed=args.seed,
    )
    _write_json(args.out, payload)
    _emit(payload)
    return 0


def _cmd_lm_train(args) -> int:
    docs, _ = load_documents(args.input)
    model = lm.train(docs, order=args.order, k=args.k, min_count=args.min_count)
    data = lm.save_model(model)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    _emit(
        {
            "model": str(out),
            "order": model.order,
            "k": model.k,
            "vocab_size": model.vocab_size,
            "contexts": len(model.counts),
            "chars_trained": model.total_chars_trained,
        }
    )
    return 0


def _cmd_dedup(args) -> int:
    docs, _ = load_documents(args.input)
    kept, clusters, report = dedup.dedup_corpus(
        docs,
        threshold=args.threshold,
        ngram=args.ngram,
        num_perm=args.num_perm,
        bands=args.num_perm // 8,
        seed=args.seed,
    )
    write_documents(kept, args.output)
    cluster_report = dedup.clusters_to_report(clusters)
    _write_json(args.clusters, cluster_report)
    _emit(report)
    return 0


def _cmd_index_build(args) -> int:
    docs, _ = load_documents(args.input)
    manifest, shards = retriever.build_index(docs, num_shards=args.shards, k1=args.k1, b=args.b)
    retriever.write_index(manifest, shards, args.out)
    _emit(
        {
            "index": str(args.out),
            "num_shards": manifest.num_shards,
            "total_docs": manifest.total_docs,
            "total_tokens": manifest.total_tokens,
            "avgdl": manifest.avgdl,
            "terms": len(manifest.df),
        }
    )
    return 0


def _cmd_search(args) -> int:
    manifest, shards = retriever.load_index(args.index)
    _emit(ops.search_payload(manifest, shards, args.query, args.topk))
    return 0


def _cmd_debug_sweep(args) -> int:
    docs, _ = load_documents(args.input)
    base = json.loads(args.params) if args.params else {}
    if args.lm and "model_path" not in base and args.filter == "filter_by_perplexity":
        base["model_path"] = args.lm
    values = [float(v) for v in args.values.split(",") if v.strip()]
    payload = ops.sweep_payload(
        docs, args.filter, args.param, values, sample_k=args.sample, seed=args.seed, base_params=base
    )
    _write_json(args.out, payload)
    _emit(payload)
    return 0


def _cmd_debug_clean_preview(args) -> int:
    docs, _ = load_documents(args.input)
    rule = CleanRule(
        scope=args.scope,
        matcher=args.matcher,
        pattern=args.pattern,
        action=args.action,
        replace_with=args.replace_with,
        fixpoint=args.fixpoint,
    )
    payload = ops.clean_preview_payload(
        docs, rule, sample_k=args.sample, seed=args.seed, max_cases=args.max_cases
    )
    _emit(payload)
    return 0


def _cmd_operators(args) -> int:
    _emit(ops.operators_payload())
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(
        corpus_path=args.corpus,
        index_dir=args.index,
        stats_path=args.stats,
        config_path=args.config,
        lm_path=args.lm,
        lang_models_spec=args.lang_models,
        port=args.port,
        host=args.host,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="garden", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="log at INFO on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reformat", help="convert raw inputs to canonical JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--format", required=True, choices=["jsonl", "plain-text", "html"])
    p.add_argument("--output", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fn=_cmd_reformat)

    p = sub.add_parser("process", help="run a pipeline config over a corpus")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(fn=_cmd_process)

    p = sub.add_parser("analyze", help="corpus statistics as JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--lm", default=None, help="n-gram model for perplexity stats")
    p.add_argument("--lang-models", default=None, help="tag=path,tag=path for language stats")
    p.add_argument("--bins", type=int, default=analyzer.DEFAULT_BINS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_analyze)

    p_lm = sub.add_parser("lm", help="language model commands")
    lm_sub = p_lm.add_subparsers(dest="lm_command", required=True)
    p = lm_sub.add_parser("train", help="train a character n-gram model")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--k", type=float, default=0.1)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_lm_train)

    p = sub.add_parser("dedup", help="near-duplicate removal via MinHash LSH")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float, default=dedup.DEFAULT_THRESHOLD)
    p.add_argument("--ngram", type=int, default=dedup.DEFAULT_NGRAM)
    p.add_argument("--num-perm", type=int, default=dedup.DEFAULT_NUM_PERM)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", default=None, help="write the cluster report JSON here")
    p.set_defaults(fn=_cmd_dedup)

    p_index = sub.add_parser("index", help="search index commands")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p = index_sub.add_parser("build", help="build the sharded BM25 index")
    p.add_argument("--input", required=True)
    p.add_argument("--shards", type=int, default=retriever.DEFAULT_NUM_SHARDS)
    p.add_argument("--k1", type=float, default=retriever.DEFAULT_K1)
    p.add_argument("--b", type=float, default=retriever.DEFAULT_B)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_index_build)

    p = sub.add_parser("search", help="query a built index")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--topk", type=int, default=10)
    p.set_defaults(fn=_cmd_search)

    p_debug = sub.add_parser("debug", help="filter/cleaner debugging")
    debug_sub = p_debug.add_subparsers(dest="debug_command", required=True)
    p = debug_sub.add_parser("sweep", help="filter ratio over a parameter grid")
    p.add_argument("--input", required=True)
    p.add_argument("--filter", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--sample", type=int, default=analyzer.DEFAULT_SWEEP_SAMPLE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lm", default=None, help="model for filter_by_perplexity sweeps")
    p.add_argument("--params", default=None, help="JSON object of non-swept parameters")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_debug_sweep)

    p = debug_sub.add_parser("clean-preview", help="dry-run a clean rule over a sample")
    p.add_argument("--input", required=True)
    p.add_argument("--scope", required=True, choices=["string", "line", "paragraph"])
    p.add_argument("--matcher", required=True, choices=["exact", "regex"])
    p.add_argument("--pattern", required=True)
    p.add_argument("--action", default="remove", choices=["remove", "replace"])
    p.add_argument("--replace-with", default="")
    p.add_argument("--fixpoint", action="store_true")
    p.add_argument("--sample", type=int, default=analyzer.DEFAULT_SWEEP_SAMPLE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cases", type=int, default=10)
    p.set_defaults(fn=_cmd_debug_clean_preview)

    p = sub.add_parser("operators", help="list registered operators")
    p.set_defaults(fn=_cmd_operators)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--port", type=int, default=None, help="GARDEN_PORT overrides this")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--corpus", default=None)
    p.add_argument("--index", default=None)
    p.add_argument("--stats", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--lm", default=None)
    p.add_argument("--lang-models", default=None)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except GardenError as exc:
        log.error("%s: %s", exc.code, exc.message)
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error [file_not_found]: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
