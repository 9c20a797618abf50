"""Document-level keep/drop operators.

Two families: labels from trained character LMs (language, perplexity) and
handcrafted features (length, script ratio, short lines, dirty words,
entity-like tokens). Every filter is a pure function of (doc, params) and
reports the measured feature value so parameter sweeps can reuse it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import lm
from .corpus import Document
from .errors import GardenError
from .textutil import is_han, is_latin_letter, nfc

SCRIPT_LATIN = "latin-alphabetic"
SCRIPT_HAN = "han"

# Stable drop reasons (machine-diffable across curation iterations).
NO_CONTENT = "no_content"
TOO_SHORT = "too_short"
TOO_LONG = "too_long"
ALPHA_RATIO_BELOW_MIN = "alpha_ratio_below_min"
TOO_MANY_SHORT_LINES = "too_many_short_lines"
DIRTY_WORD_HITS_ABOVE_MAX = "dirty_word_hits_above_max"
PERPLEXITY_ABOVE_THRESHOLD = "perplexity_above_threshold"
LANGUAGE_MISMATCH = "language_mismatch"
LANGUAGE_MARGIN_BELOW_MIN = "language_margin_below_min"
ENTITY_COUNT_ABOVE_MAX = "entity_count_above_max"
ENTITY_COUNT_BELOW_MIN = "entity_count_below_min"


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str  # empty iff keep
    feature_value: float


def _keep(value: float) -> FilterDecision:
    return FilterDecision(True, "", float(value))


def _drop(reason: str, value: float) -> FilterDecision:
    return FilterDecision(False, reason, float(value))


def _text_of(doc: Document | str) -> str:
    return doc.text if isinstance(doc, Document) else doc


def filter_by_length(
    doc: Document | str,
    min_chars: int = 0,
    max_chars: int | None = None,
) -> FilterDecision:
    """Keep iff min_chars <= |text| <= max_chars, counting Unicode scalars."""
    length = len(_text_of(doc))
    if length < min_chars:
        return _drop(TOO_SHORT, length)
    if max_chars is not None and length > max_chars:
        return _drop(TOO_LONG, length)
    return _keep(length)


def filter_by_alpha_ratio(
    doc: Document | str,
    min_ratio: float,
    script: str = SCRIPT_LATIN,
) -> FilterDecision:
    """Keep iff the chosen script covers at least min_ratio of non-whitespace chars."""
    chars = [c for c in _text_of(doc) if not c.isspace()]
    if not chars:
        return _drop(NO_CONTENT, 0.0)
    if script == SCRIPT_LATIN:
        hits = sum(1 for c in chars if is_latin_letter(c))
    elif script == SCRIPT_HAN:
        hits = sum(1 for c in chars if is_han(c))
    else:
        raise GardenError("unknown_script", f"unknown script {script!r}")
    ratio = hits / len(chars)
    if ratio >= min_ratio:
        return _keep(ratio)
    return _drop(ALPHA_RATIO_BELOW_MIN, ratio)


def filter_by_short_lines(
    doc: Document | str,
    short_line_max_chars: int,
    max_fraction: float,
) -> FilterDecision:
    """Drop documents dominated by short lines (menus, navigation dumps)."""
    lines = [line for line in _text_of(doc).split("\n") if line.strip()]
    if not lines:
        return _drop(NO_CONTENT, 0.0)
    fraction = sum(1 for line in lines if len(line) <= short_line_max_chars) / len(lines)
    if fraction <= max_fraction:
        return _keep(fraction)
    return _drop(TOO_MANY_SHORT_LINES, fraction)


def load_lexicon(path: str | Path) -> frozenset[str]:
    """Load a dirty-word lexicon: one phrase per line, '#' comments."""
    phrases = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            phrases.add(nfc(line).casefold())
    return frozenset(phrases)


def normalize_lexicon(phrases: Iterable[str]) -> frozenset[str]:
    return frozenset(nfc(p).casefold() for p in phrases if p.strip())


def _count_phrase(haystack: str, phrase: str) -> int:
    """Leftmost non-overlapping, word-boundary-delimited occurrence count."""
    hits = 0
    i = haystack.find(phrase)
    while i != -1:
        before = haystack[i - 1] if i > 0 else ""
        after_idx = i + len(phrase)
        after = haystack[after_idx] if after_idx < len(haystack) else ""
        if not (before.isalnum()) and not (after.isalnum()):
            hits += 1
        i = haystack.find(phrase, i + len(phrase))
    return hits


def filter_by_dirty_words(
    doc: Document | str,
    lexicon: Iterable[str],
    max_hits: int = 0,
) -> FilterDecision:
    """Keep iff case-insensitive whole-word lexicon hits stay within max_hits."""
    text = _text_of(doc)
    if not text.strip():
        return _drop(NO_CONTENT, 0.0)
    haystack = nfc(text).casefold()
    phrases = lexicon if isinstance(lexicon, frozenset) else normalize_lexicon(lexicon)
    hits = sum(_count_phrase(haystack, phrase) for phrase in phrases)
    if hits <= max_hits:
        return _keep(hits)
    return _drop(DIRTY_WORD_HITS_ABOVE_MAX, hits)


@dataclass(frozen=True)
class PerplexityThreshold:
    """Corpus-relative cutoff mean + s*std; s is the fil_ppl parameter."""

    mean: float
    std: float
    s: float

    def __post_init__(self) -> None:
        if self.std < 0:
            raise GardenError("bad_threshold", "std must be >= 0")
        if not math.isfinite(self.cutoff):
            raise GardenError("bad_threshold", "threshold must be finite")

    @property
    def cutoff(self) -> float:
        return self.mean + self.s * self.std


def perplexity_threshold_from_sample(
    model: lm.NgramModel,
    sample: Iterable[Document | str],
    s: float,
) -> PerplexityThreshold:
    """Fit mean/std (population) of model perplexity over a reference sample."""
    values = []
    for doc in sample:
        text = _text_of(doc)
        if text:
            values.append(lm.perplexity(model, text))
    if not values:
        raise GardenError("no_reference_sample", "no non-empty documents in reference sample")
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return PerplexityThreshold(mean=mean, std=math.sqrt(var), s=s)


def filter_by_perplexity(
    doc: Document | str,
    model: lm.NgramModel,
    threshold: PerplexityThreshold,
) -> FilterDecision:
    """Keep iff perplexity(model, text) <= mean + s*std."""
    text = _text_of(doc)
    if not text:
        return _drop(NO_CONTENT, 0.0)
    ppl = lm.perplexity(model, text)
    if ppl <= threshold.cutoff:
        return _keep(ppl)
    return _drop(PERPLEXITY_ABOVE_THRESHOLD, ppl)


def filter_by_language(
    doc: Document | str,
    models: dict[str, lm.NgramModel],
    target: str,
    min_margin: float = 0.0,
) -> FilterDecision:
    """Keep iff the argmax language equals target with enough margin."""
    text = _text_of(doc)
    if not nfc(text):
        return _drop(NO_CONTENT, 0.0)
    tag, margin = lm.classify_language(models, text)
    if tag != target:
        return _drop(LANGUAGE_MISMATCH, margin)
    if margin < min_margin:
        return _drop(LANGUAGE_MARGIN_BELOW_MIN, margin)
    return _keep(margin)


_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_END = frozenset(".!?")


def entity_like_count(doc: Document | str) -> int:
    """Heuristic entity count: distinct tokens capitalized mid-sentence or with a digit.

    "Mid-sentence" means not directly after a sentence terminator; the very
    first token of the text counts as mid-sentence. A proxy feature, not NER.
    """
    text = _text_of(doc)
    entities: set[str] = set()
    for m in _TOKEN_RE.finditer(text):
        token = m.group(0)
        if any(c.isdigit() for c in token):
            entities.add(token)
            continue
        if not token[0].isupper():
            continue
        preceding = text[: m.start()].rstrip()
        if preceding and preceding[-1] in _SENTENCE_END:
            continue  # sentence-initial
        entities.add(token)
    return len(entities)


def filter_by_entity_count(
    doc: Document | str,
    min_count: int = 0,
    max_count: int | None = None,
) -> FilterDecision:
    """Keep iff the entity-like token count is within [min_count, max_count]."""
    text = _text_of(doc)
    if not text.strip():
        return _drop(NO_CONTENT, 0.0)
    count = entity_like_count(text)
    if count < min_count:
        return _drop(ENTITY_COUNT_BELOW_MIN, count)
    if max_count is not None and count > max_count:
        return _drop(ENTITY_COUNT_ABOVE_MAX, count)
    return _keep(count)
