"""Operator registry: names, kinds, parameter schemas and factories.

The registry is the single source of truth for what a pipeline config may
name. Parameters are validated against the schema before any data is read;
factories (which may read model/lexicon files) run at plan-build time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Protocol, Sequence

from . import cleaners, dedup, filters, lm
from .corpus import Document, extract_html_text
from .errors import ConfigError
from .sampling import reservoir_sample

REQUIRED = object()

KIND_REFORMAT = "reformat"
KIND_CLEAN = "clean"
KIND_FILTER = "filter"
KIND_DEDUP = "dedup"


class FilterOp(Protocol):
    def __call__(self, doc: Document) -> filters.FilterDecision: ...


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: type
    default: Any = REQUIRED
    choices: tuple | None = None

    @property
    def required(self) -> bool:
        return self.default is REQUIRED

    @property
    def type_name(self) -> str:
        return {int: "int", float: "float", str: "str", bool: "bool"}[self.type]


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    kind: str
    params: tuple[ParamSpec, ...]
    doc: str
    factory: Callable[..., Any] | None = None
    validate: Callable[[dict], None] | None = None


def _check_type(spec: ParamSpec, value: Any, where: str) -> Any:
    if spec.type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: parameter {spec.name!r}: expected number, got {value!r}")
        return float(value)
    if spec.type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: parameter {spec.name!r}: expected integer, got {value!r}")
        return value
    if spec.type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: parameter {spec.name!r}: expected boolean, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{where}: parameter {spec.name!r}: expected string, got {value!r}")
    return value


def normalize_params(op: OperatorSpec, params: dict[str, Any], where: str = "") -> dict[str, Any]:
    """Fill defaults and type-check; rejects unknown and missing parameters."""
    where = where or f"operator {op.name!r}"
    known = {p.name: p for p in op.params}
    for name in params:
        if name not in known:
            raise ConfigError(f"{where}: unknown parameter {name!r}")
    out: dict[str, Any] = {}
    for spec in op.params:
        if spec.name in params:
            value = _check_type(spec, params[spec.name], where)
        elif spec.required:
            raise ConfigError(f"{where}: missing required parameter {spec.name!r}")
        else:
            value = spec.default
        if spec.choices is not None and value not in spec.choices:
            raise ConfigError(
                f"{where}: parameter {spec.name!r} must be one of {list(spec.choices)}, got {value!r}"
            )
        out[spec.name] = value
    if op.validate is not None:
        try:
            op.validate(out)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc.message}") from None
    return out


# --- cached artifact loading ------------------------------------------------


def _file_key(path: str) -> tuple[str, int, int]:
    st = os.stat(path)
    return (os.path.abspath(path), st.st_size, st.st_mtime_ns)


@lru_cache(maxsize=32)
def _load_model_cached(key: tuple[str, int, int]) -> lm.NgramModel:
    return lm.load_model_file(key[0])


def load_model_path(path: str) -> lm.NgramModel:
    try:
        return _load_model_cached(_file_key(path))
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {path}") from None


def _parse_model_map(spec: str) -> dict[str, str]:
    """Parse "tag=path,tag=path" into an ordered mapping."""
    out: dict[str, str] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad language model entry {part!r}, expected tag=path")
        tag, path = part.split("=", 1)
        if not tag.strip() or not path.strip():
            raise ConfigError(f"bad language model entry {part!r}, expected tag=path")
        out[tag.strip()] = path.strip()
    return out


def load_language_models(spec: str) -> dict[str, lm.NgramModel]:
    return {tag: load_model_path(path) for tag, path in _parse_model_map(spec).items()}


# --- filter stage objects ----------------------------------------------------


class _PerplexityFilter:
    """Two-phase filter: threshold fit on a seeded sample of the stage input."""

    def __init__(self, model: lm.NgramModel, fil_ppl: float, ref_sample_size: int):
        self.model = model
        self.s = fil_ppl
        self.ref_sample_size = ref_sample_size
        self.threshold: filters.PerplexityThreshold | None = None

    def prepare(self, docs: Sequence[Document], seed: int) -> None:
        reference = reservoir_sample(docs, self.ref_sample_size, seed)
        self.threshold = filters.perplexity_threshold_from_sample(self.model, reference, self.s)

    def __call__(self, doc: Document) -> filters.FilterDecision:
        if self.threshold is None:
            raise ConfigError("perplexity filter used before threshold preparation")
        return filters.filter_by_perplexity(doc, self.model, self.threshold)


# --- factories ---------------------------------------------------------------


def _make_length(p: dict) -> FilterOp:
    return lambda doc: filters.filter_by_length(doc, p["min_chars"], p["max_chars"])


def _make_alpha(p: dict) -> FilterOp:
    return lambda doc: filters.filter_by_alpha_ratio(doc, p["min_ratio"], p["script"])


def _make_short_lines(p: dict) -> FilterOp:
    return lambda doc: filters.filter_by_short_lines(doc, p["short_line_max_chars"], p["max_fraction"])


def _make_dirty_words(p: dict) -> FilterOp:
    lexicon = filters.load_lexicon(p["lexicon"])
    return lambda doc: filters.filter_by_dirty_words(doc, lexicon, p["max_hits"])


def _make_perplexity(p: dict) -> _PerplexityFilter:
    model = load_model_path(p["model_path"])
    return _PerplexityFilter(model, p["fil_ppl"], p["ref_sample_size"])


def _make_language(p: dict) -> FilterOp:
    models = load_language_models(p["models"])
    if len(models) < 2:
        raise ConfigError("filter_by_language requires at least 2 models")
    return lambda doc: filters.filter_by_language(doc, models, p["target"], p["min_margin"])


def _make_entity_count(p: dict) -> FilterOp:
    return lambda doc: filters.filter_by_entity_count(doc, p["min_count"], p["max_count"])


def _make_clean_rule(p: dict) -> Callable[[Document], Document]:
    rule = _rule_from_params(p)
    cleaners.validate_rule(rule)

    def run(doc: Document) -> Document:
        cleaned, _ = cleaners.clean_pipeline_stage(doc, [rule])
        return cleaned

    return run


def _make_extract_html(p: dict) -> Callable[[Document], Document]:
    from dataclasses import replace

    def run(doc: Document) -> Document:
        extracted = extract_html_text(doc.text)
        return doc if extracted == doc.text else replace(doc, text=extracted)

    return run


def _rule_from_params(p: dict) -> cleaners.CleanRule:
    return cleaners.CleanRule(
        scope=p["scope"],
        matcher=p["matcher"],
        pattern=p["pattern"],
        action=p["action"],
        replace_with=p["replace_with"],
        fixpoint=p["fixpoint"],
    )


# --- validators --------------------------------------------------------------


def _validate_length(p: dict) -> None:
    if p["min_chars"] < 0:
        raise ConfigError("min_chars must be >= 0")
    if p["max_chars"] < p["min_chars"]:
        raise ConfigError("max_chars must be >= min_chars")


def _validate_alpha(p: dict) -> None:
    if not 0.0 <= p["min_ratio"] <= 1.0:
        raise ConfigError("min_ratio must be in [0, 1]")


def _validate_short_lines(p: dict) -> None:
    if p["short_line_max_chars"] < 0:
        raise ConfigError("short_line_max_chars must be >= 0")
    if not 0.0 <= p["max_fraction"] <= 1.0:
        raise ConfigError("max_fraction must be in [0, 1]")


def _validate_dirty(p: dict) -> None:
    if p["max_hits"] < 0:
        raise ConfigError("max_hits must be >= 0")


def _validate_perplexity(p: dict) -> None:
    if p["ref_sample_size"] < 1:
        raise ConfigError("ref_sample_size must be >= 1")


def _validate_language(p: dict) -> None:
    if len(_parse_model_map(p["models"])) < 2:
        raise ConfigError("models must name at least 2 tag=path entries")


def _validate_entity(p: dict) -> None:
    if p["min_count"] < 0:
        raise ConfigError("min_count must be >= 0")
    if p["max_count"] < p["min_count"]:
        raise ConfigError("max_count must be >= min_count")


def _validate_clean_rule(p: dict) -> None:
    cleaners.validate_rule(_rule_from_params(p))


def _validate_dedup(p: dict) -> None:
    if not 0.0 < p["threshold"] <= 1.0:
        raise ConfigError("threshold must be in (0, 1]")
    if p["ngram"] < 1:
        raise ConfigError("ngram must be >= 1")
    if p["num_perm"] < 8 or p["num_perm"] % 8 != 0:
        raise ConfigError("num_perm must be a positive multiple of 8")


_UNBOUNDED = 10**12

_OPERATORS: tuple[OperatorSpec, ...] = (
    OperatorSpec(
        name="filter_by_length",
        kind=KIND_FILTER,
        params=(
            ParamSpec("min_chars", int, 0),
            ParamSpec("max_chars", int, _UNBOUNDED),
        ),
        doc="Keep documents whose character count lies in [min_chars, max_chars].",
        factory=_make_length,
        validate=_validate_length,
    ),
    OperatorSpec(
        name="filter_by_alpha_ratio",
        kind=KIND_FILTER,
        params=(
            ParamSpec("min_ratio", float),
            ParamSpec("script", str, "latin-alphabetic", choices=(filters.SCRIPT_LATIN, filters.SCRIPT_HAN)),
        ),
        doc="Keep documents where the chosen script covers at least min_ratio of non-whitespace characters.",
        factory=_make_alpha,
        validate=_validate_alpha,
    ),
    OperatorSpec(
        name="filter_by_short_lines",
        kind=KIND_FILTER,
        params=(
            ParamSpec("short_line_max_chars", int),
            ParamSpec("max_fraction", float),
        ),
        doc="Drop documents where too large a fraction of lines is short (menu/navigation dumps).",
        factory=_make_short_lines,
        validate=_validate_short_lines,
    ),
    OperatorSpec(
        name="filter_by_dirty_words",
        kind=KIND_FILTER,
        params=(
            ParamSpec("lexicon", str),
            ParamSpec("max_hits", int, 0),
        ),
        doc="Drop documents with more than max_hits whole-word lexicon matches.",
        factory=_make_dirty_words,
        validate=_validate_dirty,
    ),
    OperatorSpec(
        name="filter_by_perplexity",
        kind=KIND_FILTER,
        params=(
            ParamSpec("model_path", str),
            ParamSpec("fil_ppl", float, 3.0),
            ParamSpec("ref_sample_size", int, 1000),
        ),
        doc="Drop documents whose perplexity exceeds mean + fil_ppl * std over a seeded reference sample.",
        factory=_make_perplexity,
        validate=_validate_perplexity,
    ),
    OperatorSpec(
        name="filter_by_language",
        kind=KIND_FILTER,
        params=(
            ParamSpec("models", str),
            ParamSpec("target", str),
            ParamSpec("min_margin", float, 0.0),
        ),
        doc="Keep documents whose predicted language equals target with at least min_margin confidence.",
        factory=_make_language,
        validate=_validate_language,
    ),
    OperatorSpec(
        name="filter_by_entity_count",
        kind=KIND_FILTER,
        params=(
            ParamSpec("min_count", int, 0),
            ParamSpec("max_count", int, _UNBOUNDED),
        ),
        doc="Keep documents whose entity-like token count lies in [min_count, max_count].",
        factory=_make_entity_count,
        validate=_validate_entity,
    ),
    OperatorSpec(
        name="clean_rule",
        kind=KIND_CLEAN,
        params=(
            ParamSpec("scope", str, choices=cleaners.SCOPES),
            ParamSpec("matcher", str, choices=cleaners.MATCHERS),
            ParamSpec("pattern", str),
            ParamSpec("action", str, "remove", choices=cleaners.ACTIONS),
            ParamSpec("replace_with", str, ""),
            ParamSpec("fixpoint", bool, False),
        ),
        doc="Remove or replace exact/regex matches at string, line or paragraph scope.",
        factory=_make_clean_rule,
        validate=_validate_clean_rule,
    ),
    OperatorSpec(
        name="extract_html",
        kind=KIND_REFORMAT,
        params=(),
        doc="Replace document text with its HTML-stripped extraction.",
        factory=_make_extract_html,
    ),
    OperatorSpec(
        name="dedup_minhash",
        kind=KIND_DEDUP,
        params=(
            ParamSpec("ngram", int, dedup.DEFAULT_NGRAM),
            ParamSpec("num_perm", int, dedup.DEFAULT_NUM_PERM),
            ParamSpec("threshold", float, dedup.DEFAULT_THRESHOLD),
            ParamSpec("mode", str, "word", choices=("word", "char")),
        ),
        doc="Remove near-duplicates via MinHash LSH over token shingles.",
        validate=_validate_dedup,
    ),
)

REGISTRY: dict[str, OperatorSpec] = {op.name: op for op in _OPERATORS}


def get_operator(name: str) -> OperatorSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown operator {name!r}") from None


def list_operators() -> list[dict]:
    """Stable, alphabetical operator listing for CLI help and the config editor."""
    out = []
    for name in sorted(REGISTRY):
        op = REGISTRY[name]
        out.append(
            {
                "name": op.name,
                "kind": op.kind,
                "doc": op.doc,
                "params": [
                    {
                        "name": p.name,
                        "type": p.type_name,
                        "required": p.required,
                        "default": None if p.required else p.default,
                        "choices": list(p.choices) if p.choices else None,
                    }
                    for p in op.params
                ],
            }
        )
    return out


def build_filter(
    name: str,
    params: dict[str, Any],
    docs: Sequence[Document] = (),
    seed: int = 0,
) -> FilterOp:
    """Instantiate a filter with normalized params, running its prepare phase."""
    op = get_operator(name)
    if op.kind != KIND_FILTER:
        raise ConfigError(f"operator {name!r} is not a filter")
    normalized = normalize_params(op, params)
    assert op.factory is not None
    fn = op.factory(normalized)
    if hasattr(fn, "prepare") and docs:
        fn.prepare(docs, seed)
    return fn
