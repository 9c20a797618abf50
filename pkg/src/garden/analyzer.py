"""Corpus statistics, filter-parameter sweeps and cleaner match previews.

Everything here is a pure function of (corpus, params, seed): sweeps and
previews run on one fixed seeded sample so curves are comparable across
parameter values, and stats reports serialize to JSON for the CLI, the
HTTP API and the dashboard alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import lm
from .cleaners import CleanRule, apply_rule, validate_rule
from .corpus import Document
from .errors import ConfigError
from .sampling import reservoir_sample

DEFAULT_BINS = 50
DEFAULT_SWEEP_SAMPLE = 1000
LOG_SCALE_RATIO = 1000.0


@dataclass
class Histogram:
    edges: list[float]  # strictly ascending
    counts: list[int]
    underflow: int = 0
    overflow: int = 0
    log_scale: bool = False


@dataclass
class FeatureStats:
    count: int
    mean: float
    std: float  # population std
    histogram: Histogram


@dataclass
class CorpusStats:
    doc_count: int
    total_chars: int
    length: FeatureStats | None = None
    perplexity: FeatureStats | None = None
    languages: dict[str, int] | None = None
    seed: int | None = None


@dataclass
class SweepResult:
    filter_name: str
    param_name: str
    values: list[float]
    filter_ratios: list[float]
    sample_size: int
    seed: int


@dataclass
class MatchCase:
    doc_id: str
    start: int
    end: int
    context: str


@dataclass
class MatchCaseReport:
    rule: CleanRule
    total_matches: int
    cases: list[MatchCase] = field(default_factory=list)
    sample_size: int = 0
    seed: int = 0


def sample(corpus: Sequence[Document] | Iterable[Document], k: int, seed: int) -> list[Document]:
    """Deterministic reservoir sample of min(k, N) documents in input order."""
    return reservoir_sample(corpus, k, seed)


def build_histogram(
    values: Sequence[float],
    bins: int = DEFAULT_BINS,
    edges: Sequence[float] | None = None,
    log_scale: bool | None = None,
) -> Histogram:
    """Equal-width (or log-spaced) histogram with under/overflow buckets.

    Log spacing is auto-selected when max/min exceeds 1000 and all values
    are positive. The last bin includes its right edge.
    """
    data = np.asarray(list(values), dtype=float)
    if edges is not None:
        edge_arr = np.asarray(list(edges), dtype=float)
        log_flag = bool(log_scale)
    else:
        if data.size == 0:
            return Histogram(edges=[0.0, 1.0], counts=[0], log_scale=False)
        lo, hi = float(data.min()), float(data.max())
        if log_scale is None:
            log_flag = lo > 0 and hi / lo > LOG_SCALE_RATIO
        else:
            log_flag = log_scale and lo > 0
        if lo == hi:
            edge_arr = np.array([lo, hi + 1.0])
        elif log_flag:
            edge_arr = np.geomspace(lo, hi, bins + 1)
        else:
            edge_arr = np.linspace(lo, hi, bins + 1)
    underflow = int(np.count_nonzero(data < edge_arr[0]))
    overflow = int(np.count_nonzero(data > edge_arr[-1]))
    inside = data[(data >= edge_arr[0]) & (data <= edge_arr[-1])]
    counts, _ = np.histogram(inside, bins=edge_arr)
    return Histogram(
        edges=[float(e) for e in edge_arr],
        counts=[int(c) for c in counts],
        underflow=underflow,
        overflow=overflow,
        log_scale=log_flag,
    )


def _feature_stats(values: Sequence[float], bins: int, edges: Sequence[float] | None = None) -> FeatureStats:
    data = list(values)
    mean = sum(data) / len(data)
    std = math.sqrt(sum((v - mean) ** 2 for v in data) / len(data))
    return FeatureStats(count=len(data), mean=mean, std=std, histogram=build_histogram(data, bins, edges=edges))


def compute_stats(
    corpus: Sequence[Document],
    model: lm.NgramModel | None = None,
    lang_models: dict[str, lm.NgramModel] | None = None,
    bins: int = DEFAULT_BINS,
    seed: int | None = None,
    length_edges: Sequence[float] | None = None,
    perplexity_edges: Sequence[float] | None = None,
) -> CorpusStats:
    """Length/perplexity/language distributions over the given documents.

    Perplexity and language sections appear only when models are supplied
    and cover the documents with non-empty text.
    """
    docs = list(corpus)
    lengths = [len(d.text) for d in docs]
    stats = CorpusStats(doc_count=len(docs), total_chars=sum(lengths), seed=seed)
    if docs:
        stats.length = _feature_stats(lengths, bins, edges=length_edges)
    if model is not None and docs:
        ppls = [lm.perplexity(model, d.text) for d in docs if d.text]
        if ppls:
            stats.perplexity = _feature_stats(ppls, bins, edges=perplexity_edges)
    if lang_models is not None and docs:
        counts: dict[str, int] = {}
        for d in docs:
            if not d.text:
                continue
            tag, _ = lm.classify_language(lang_models, d.text)
            counts[tag] = counts.get(tag, 0) + 1
        stats.languages = dict(sorted(counts.items()))
    return stats


def sweep_filter(
    corpus: Sequence[Document],
    filter_name: str,
    param_name: str,
    values: Sequence[float],
    sample_k: int = DEFAULT_SWEEP_SAMPLE,
    seed: int = 0,
    base_params: dict[str, Any] | None = None,
) -> SweepResult:
    """Filter ratio (dropped / sample size) at each parameter value.

    The whole grid is evaluated on one fixed seeded sample; non-swept
    parameters sit at their registry defaults overlaid with base_params.
    """
    from .registry import build_filter, get_operator  # local import: registry imports analyzer helpers

    if not values:
        raise ConfigError("sweep requires a non-empty value grid")
    spec = get_operator(filter_name)
    if spec.kind != "filter":
        raise ConfigError(f"operator {filter_name!r} is not a filter")
    if param_name not in {p.name for p in spec.params}:
        raise ConfigError(f"filter {filter_name!r} has no parameter {param_name!r}")

    param_spec = next(p for p in spec.params if p.name == param_name)

    def coerce(value):
        # Grids arrive as floats; integer parameters take integral values.
        if param_spec.type is int:
            if float(value) != int(value):
                raise ConfigError(
                    f"parameter {param_name!r} is an integer; got non-integral value {value!r}"
                )
            return int(value)
        return value

    sampled = sample(corpus, sample_k, seed) if corpus else []
    ratios = []
    for value in values:
        params = dict(base_params or {})
        params[param_name] = coerce(value)
        fn = build_filter(filter_name, params, docs=sampled, seed=seed)
        dropped = sum(1 for doc in sampled if not fn(doc).keep)
        ratios.append(dropped / len(sampled) if sampled else 0.0)
    return SweepResult(
        filter_name=filter_name,
        param_name=param_name,
        values=[float(v) for v in values],
        filter_ratios=ratios,
        sample_size=len(sampled),
        seed=seed,
    )


def preview_clean(
    corpus: Sequence[Document],
    rule: CleanRule,
    sample_k: int = DEFAULT_SWEEP_SAMPLE,
    seed: int = 0,
    max_cases: int = 10,
) -> MatchCaseReport:
    """Dry-run a clean rule over a seeded sample and collect match cases."""
    validate_rule(rule)
    sampled = sample(corpus, sample_k, seed) if corpus else []
    total = 0
    cases: list[MatchCase] = []
    for doc in sampled:
        result = apply_rule(doc, rule)
        total += result.matches
        for span in result.spans_sample:
            if len(cases) < max_cases:
                cases.append(MatchCase(doc_id=doc.id, start=span.start, end=span.end, context=span.context))
    return MatchCaseReport(rule=rule, total_matches=total, cases=cases, sample_size=len(sampled), seed=seed)


# --- JSON serialization ----------------------------------------------------


def _histogram_to_dict(h: Histogram) -> dict:
    return {
        "edges": h.edges,
        "counts": h.counts,
        "underflow": h.underflow,
        "overflow": h.overflow,
        "log_scale": h.log_scale,
    }


def _feature_to_dict(f: FeatureStats | None) -> dict | None:
    if f is None:
        return None
    return {"count": f.count, "mean": f.mean, "std": f.std, "histogram": _histogram_to_dict(f.histogram)}


def stats_to_dict(stats: CorpusStats) -> dict:
    return {
        "doc_count": stats.doc_count,
        "total_chars": stats.total_chars,
        "length": _feature_to_dict(stats.length),
        "perplexity": _feature_to_dict(stats.perplexity),
        "languages": stats.languages,
        "seed": stats.seed,
    }


def sweep_to_dict(result: SweepResult) -> dict:
    return {
        "filter_name": result.filter_name,
        "param_name": result.param_name,
        "values": result.values,
        "filter_ratios": result.filter_ratios,
        "sample_size": result.sample_size,
        "seed": result.seed,
    }


def match_report_to_dict(report: MatchCaseReport) -> dict:
    return {
        "rule": {
            "scope": report.rule.scope,
            "matcher": report.rule.matcher,
            "pattern": report.rule.pattern,
            "action": report.rule.action,
            "replace_with": report.rule.replace_with,
            "fixpoint": report.rule.fixpoint,
        },
        "total_matches": report.total_matches,
        "cases": [
            {"doc_id": c.doc_id, "start": c.start, "end": c.end, "context": c.context}
            for c in report.cases
        ],
        "sample_size": report.sample_size,
        "seed": report.seed,
    }


def _diff_feature(raw: dict | None, refined: dict | None) -> dict:
    if raw is None or refined is None:
        return {"compatible": False, "missing_in": "refined" if raw else "raw"}
    out = {
        "compatible": True,
        "count_delta": refined["count"] - raw["count"],
        "mean_delta": refined["mean"] - raw["mean"],
        "std_delta": refined["std"] - raw["std"],
    }
    if raw["histogram"]["edges"] == refined["histogram"]["edges"]:
        out["bin_deltas"] = [
            r - a for a, r in zip(raw["histogram"]["counts"], refined["histogram"]["counts"])
        ]
    else:
        out["bin_deltas"] = None
        out["binning_mismatch"] = True
    return out


def diff_stats(raw: CorpusStats | dict, refined: CorpusStats | dict) -> dict:
    """Per-feature deltas between two stats reports (refined minus raw)."""
    raw_d = stats_to_dict(raw) if isinstance(raw, CorpusStats) else raw
    ref_d = stats_to_dict(refined) if isinstance(refined, CorpusStats) else refined
    report: dict[str, Any] = {
        "doc_count_delta": ref_d["doc_count"] - raw_d["doc_count"],
        "total_chars_delta": ref_d["total_chars"] - raw_d["total_chars"],
        "features": {
            "length": _diff_feature(raw_d.get("length"), ref_d.get("length")),
            "perplexity": _diff_feature(raw_d.get("perplexity"), ref_d.get("perplexity")),
        },
    }
    raw_langs = raw_d.get("languages") or {}
    ref_langs = ref_d.get("languages") or {}
    if raw_langs or ref_langs:
        report["languages_delta"] = {
            tag: ref_langs.get(tag, 0) - raw_langs.get(tag, 0)
            for tag in sorted(set(raw_langs) | set(ref_langs))
        }
    return report
