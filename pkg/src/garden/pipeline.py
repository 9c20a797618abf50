"""Config parsing and ordered execution of operator stages.

A config (JSON or YAML) lists stages by operator name; validation happens
entirely before any data is read. Execution maps pure per-document
operators over the stream (optionally on worker threads, with an
order-preserving merge) and keeps per-stage accounting, so reruns of the
same config over the same input are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import yaml

from . import dedup as dedup_mod
from . import registry
from .corpus import Document
from .dedup import DupCluster
from .errors import ConfigError
from .filters import FilterDecision

DEDUP_DROP_REASON = "near_duplicate"


@dataclass
class StageSpec:
    operator: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    enabled: bool = True


@dataclass
class PipelineConfig:
    stages: list[StageSpec] = field(default_factory=list)
    strict: bool = False
    seed: int = 0
    workers: int = 1


@dataclass
class StageReport:
    index: int
    operator: str
    input_count: int
    kept: int
    dropped: int
    modified: int
    drop_reasons: dict[str, int]
    wall_time: float


@dataclass
class RunReport:
    stages: list[StageReport] = field(default_factory=list)
    input_count: int = 0
    output_count: int = 0
    wall_time: float = 0.0
    seed: int = 0
    complete: bool = False
    clusters: list[DupCluster] = field(default_factory=list)


def load_config(data: bytes | str) -> PipelineConfig:
    """Parse and fully validate a pipeline config (JSON if it opens with '{').

    Unknown operators and ill-typed parameters are rejected here, before
    any corpus data is read; parse errors carry line/column positions.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                code="config_parse",
            ) from None
    else:
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1} column {mark.column + 1}" if mark else ""
            raise ConfigError(f"config parse error{where}: {exc}", code="config_parse") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")

    known_keys = {"stages", "strict", "seed", "workers"}
    for key in raw:
        if key not in known_keys:
            raise ConfigError(f"unknown top-level config key {key!r}")

    strict = raw.get("strict", False)
    if not isinstance(strict, bool):
        raise ConfigError("strict must be a boolean")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    workers = raw.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be an integer >= 1")

    raw_stages = raw.get("stages", [])
    if not isinstance(raw_stages, list):
        raise ConfigError("stages must be a list")

    stages: list[StageSpec] = []
    for idx, entry in enumerate(raw_stages):
        where = f"stage {idx}"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: must be a mapping")
        name = entry.get("operator")
        if not isinstance(name, str):
            raise ConfigError(f"{where}: missing operator name")
        for key in entry:
            if key not in ("operator", "params", "enabled"):
                raise ConfigError(f"{where} ({name}): unknown stage key {key!r}")
        op = registry.get_operator(name)
        params = entry.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{where} ({name}): params must be a mapping")
        enabled = entry.get("enabled", True)
        if not isinstance(enabled, bool):
            raise ConfigError(f"{where} ({name}): enabled must be a boolean")
        normalized = registry.normalize_params(op, params, where=f"{where} ({name})")
        stages.append(StageSpec(operator=name, kind=op.kind, params=normalized, enabled=enabled))

    enabled_stages = [s for s in stages if s.enabled]
    dedup_positions = [i for i, s in enumerate(enabled_stages) if s.kind == registry.KIND_DEDUP]
    if len(dedup_positions) > 1:
        raise ConfigError("at most one dedup stage is allowed")
    if dedup_positions and dedup_positions[0] != len(enabled_stages) - 1:
        raise ConfigError("the dedup stage must be last (it requires global state)")

    return PipelineConfig(stages=stages, strict=strict, seed=seed, workers=workers)


def load_config_file(path) -> PipelineConfig:
    from pathlib import Path

    return load_config(Path(path).read_bytes())


@dataclass
class _RuntimeStage:
    index: int
    spec: StageSpec
    fn: Callable[[Document], Any] | None  # None for dedup


def build_pipeline(config: PipelineConfig) -> list[_RuntimeStage]:
    """Instantiate operator stages; loads model/lexicon files, so it can fail
    before data is read but after load_config validation."""
    stages = []
    for idx, spec in enumerate(config.stages):
        if not spec.enabled:
            continue
        op = registry.get_operator(spec.operator)
        if op.kind == registry.KIND_DEDUP:
            stages.append(_RuntimeStage(index=idx, spec=spec, fn=None))
            continue
        assert op.factory is not None
        stages.append(_RuntimeStage(index=idx, spec=spec, fn=op.factory(spec.params)))
    return stages


def _map_ordered(fn: Callable, docs: Sequence[Document], workers: int) -> list:
    if workers <= 1 or len(docs) < 2:
        return [fn(doc) for doc in docs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, docs))


def run_pipeline(
    config: PipelineConfig, docs: Iterable[Document]
) -> tuple[list[Document], RunReport]:
    """Execute enabled stages in order over the documents.

    Surviving documents preserve input order; the report carries one
    StageReport per enabled stage with kept + dropped = input_count.
    """
    t_start = time.perf_counter()
    current = list(docs)
    report = RunReport(input_count=len(current), seed=config.seed)

    for stage in build_pipeline(config):
        t0 = time.perf_counter()
        spec = stage.spec
        input_count = len(current)

        if spec.kind == registry.KIND_DEDUP:
            params = spec.params
            kept, clusters, _info = dedup_mod.dedup_corpus(
                current,
                threshold=params["threshold"],
                ngram=params["ngram"],
                num_perm=params["num_perm"],
                bands=params["num_perm"] // 8,
                seed=config.seed,
                mode=params["mode"],
            )
            dropped = input_count - len(kept)
            report.clusters = clusters
            report.stages.append(
                StageReport(
                    index=stage.index,
                    operator=spec.operator,
                    input_count=input_count,
                    kept=len(kept),
                    dropped=dropped,
                    modified=0,
                    drop_reasons={DEDUP_DROP_REASON: dropped} if dropped else {},
                    wall_time=time.perf_counter() - t0,
                )
            )
            current = kept
            continue

        assert stage.fn is not None
        if spec.kind == registry.KIND_FILTER:
            if hasattr(stage.fn, "prepare") and current:
                stage.fn.prepare(current, config.seed)
            decisions: list[FilterDecision] = _map_ordered(stage.fn, current, config.workers)
            kept_docs = [doc for doc, d in zip(current, decisions) if d.keep]
            reasons: dict[str, int] = {}
            for d in decisions:
                if not d.keep:
                    reasons[d.reason] = reasons.get(d.reason, 0) + 1
            report.stages.append(
                StageReport(
                    index=stage.index,
                    operator=spec.operator,
                    input_count=input_count,
                    kept=len(kept_docs),
                    dropped=input_count - len(kept_docs),
                    modified=0,
                    drop_reasons=dict(sorted(reasons.items())),
                    wall_time=time.perf_counter() - t0,
                )
            )
            current = kept_docs
        else:  # clean / reformat: per-document rewrite, nothing dropped
            new_docs: list[Document] = _map_ordered(stage.fn, current, config.workers)
            modified = sum(1 for old, new in zip(current, new_docs) if old.text != new.text)
            report.stages.append(
                StageReport(
                    index=stage.index,
                    operator=spec.operator,
                    input_count=input_count,
                    kept=input_count,
                    dropped=0,
                    modified=modified,
                    drop_reasons={},
                    wall_time=time.perf_counter() - t0,
                )
            )
            current = new_docs

    report.output_count = len(current)
    report.wall_time = time.perf_counter() - t_start
    report.complete = True
    return current, report


def report_to_dict(report: RunReport) -> dict:
    return {
        "input_count": report.input_count,
        "output_count": report.output_count,
        "wall_time": report.wall_time,
        "seed": report.seed,
        "complete": report.complete,
        "stages": [
            {
                "index": s.index,
                "operator": s.operator,
                "input_count": s.input_count,
                "kept": s.kept,
                "dropped": s.dropped,
                "modified": s.modified,
                "drop_reasons": s.drop_reasons,
                "wall_time": s.wall_time,
            }
            for s in report.stages
        ],
        "clusters": dedup_mod.clusters_to_report(report.clusters),
    }
