"""Shared result-payload builders behind both the CLI and the HTTP API.

Both surfaces serialize exactly these dicts, which is what makes API/CLI
parity a structural property instead of a test-time coincidence.
"""

from __future__ import annotations

from typing import Any, Sequence

from . import analyzer, lm, registry, retriever
from .cleaners import CleanRule
from .corpus import Document


def stats_payload(
    docs: Sequence[Document],
    model: lm.NgramModel | None = None,
    lang_models: dict[str, lm.NgramModel] | None = None,
    bins: int = analyzer.DEFAULT_BINS,
    seed: int | None = None,
) -> dict:
    stats = analyzer.compute_stats(docs, model=model, lang_models=lang_models, bins=bins, seed=seed)
    return analyzer.stats_to_dict(stats)


def diff_payload(raw: dict, refined: dict) -> dict:
    return analyzer.diff_stats(raw, refined)


def search_payload(
    manifest: retriever.IndexManifest,
    shards: Sequence[retriever.ShardIndex],
    query: str,
    k: int,
) -> dict:
    hits = retriever.search(manifest, shards, query, k)
    return {
        "query": query,
        "k": k,
        "hits": [{"doc_id": h.doc_id, "score": h.score, "snippet": h.snippet} for h in hits],
    }


def sweep_payload(
    docs: Sequence[Document],
    filter_name: str,
    param_name: str,
    values: Sequence[float],
    sample_k: int,
    seed: int,
    base_params: dict[str, Any] | None = None,
) -> dict:
    result = analyzer.sweep_filter(
        docs, filter_name, param_name, values, sample_k=sample_k, seed=seed, base_params=base_params
    )
    return analyzer.sweep_to_dict(result)


def clean_preview_payload(
    docs: Sequence[Document],
    rule: CleanRule,
    sample_k: int,
    seed: int,
    max_cases: int = 10,
) -> dict:
    report = analyzer.preview_clean(docs, rule, sample_k=sample_k, seed=seed, max_cases=max_cases)
    return analyzer.match_report_to_dict(report)


def operators_payload() -> list[dict]:
    return registry.list_operators()
