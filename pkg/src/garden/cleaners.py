"""Sub-document repair operators.

A CleanRule pairs a matcher (exact literal or restricted regex) with an
action (remove or replace) at string, line or paragraph scope. Line and
paragraph scope treat whole units: a matching unit is deleted together
with its trailing delimiter. Cleaning never drops documents; emptied
documents pass through for a downstream length filter to catch.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace as dc_replace
from typing import Iterable

from .corpus import Document
from .errors import ConfigError, GardenError

SCOPES = ("string", "line", "paragraph")
MATCHERS = ("exact", "regex")
ACTIONS = ("remove", "replace")

_FIXPOINT_LIMIT = 100
_CONTEXT_CHARS = 40
_MAX_SPANS = 10

# Constructs outside the linear-time-safe dialect: backreferences and
# lookaround invite catastrophic backtracking on crawl-scale inputs.
_FORBIDDEN_RE = re.compile(r"\\[1-9]|\(\?P=|\(\?=|\(\?!|\(\?<=|\(\?<!")


@dataclass(frozen=True)
class CleanRule:
    scope: str  # string | line | paragraph
    matcher: str  # exact | regex
    pattern: str
    action: str = "remove"  # remove | replace
    replace_with: str = ""
    fixpoint: bool = False


@dataclass(frozen=True)
class MatchSpan:
    start: int
    end: int
    context: str  # +-40 chars of the original text around the span


@dataclass
class CleanResult:
    text: str
    matches: int
    spans_sample: list[MatchSpan] = field(default_factory=list)


def validate_rule(rule: CleanRule) -> re.Pattern[str] | None:
    """Check a rule at config-load time; returns the compiled regex if any."""
    if rule.scope not in SCOPES:
        raise ConfigError(f"unknown clean scope {rule.scope!r}, expected one of {SCOPES}")
    if rule.matcher not in MATCHERS:
        raise ConfigError(f"unknown matcher {rule.matcher!r}, expected one of {MATCHERS}")
    if rule.action not in ACTIONS:
        raise ConfigError(f"unknown action {rule.action!r}, expected one of {ACTIONS}")
    if rule.matcher == "exact":
        if rule.pattern == "":
            raise ConfigError("exact matcher requires a non-empty pattern")
        return None
    if _FORBIDDEN_RE.search(rule.pattern):
        raise ConfigError(
            "regex uses backreferences or lookaround, which are outside the supported dialect"
        )
    try:
        return re.compile(rule.pattern)
    except re.error as exc:
        raise ConfigError(f"regex does not compile: {exc}") from exc


def _find_exact(text: str, pattern: str) -> list[tuple[int, int]]:
    """Leftmost non-overlapping literal occurrences."""
    spans = []
    i = text.find(pattern)
    while i != -1:
        spans.append((i, i + len(pattern)))
        i = text.find(pattern, i + len(pattern))
    return spans


def _find_matches(text: str, rule: CleanRule, regex: re.Pattern[str] | None) -> list[tuple[int, int]]:
    if rule.matcher == "exact":
        return _find_exact(text, rule.pattern)
    assert regex is not None
    return [m.span() for m in regex.finditer(text)]


def _splice(text: str, spans: list[tuple[int, int]], replacement: str) -> str:
    parts = []
    pos = 0
    for start, end in spans:
        parts.append(text[pos:start])
        parts.append(replacement)
        pos = end
    parts.append(text[pos:])
    return "".join(parts)


def _line_units(text: str) -> list[tuple[int, int, int]]:
    """(start, end, delim_end) per line; delim_end includes the trailing newline."""
    units = []
    pos = 0
    while pos <= len(text):
        nl = text.find("\n", pos)
        if nl == -1:
            units.append((pos, len(text), len(text)))
            break
        units.append((pos, nl, nl + 1))
        pos = nl + 1
    # A trailing newline produces a final empty unit; drop it so joins are stable.
    if len(units) > 1 and units[-1][0] == units[-1][1] == len(text):
        units.pop()
    return units


def _paragraph_units(text: str) -> list[tuple[int, int, int]]:
    """(start, end, delim_end) per blank-line-separated paragraph.

    A paragraph is a maximal run of non-blank lines; its delimiter is the
    run of blank lines that follows it.
    """
    lines = _line_units(text)
    blank = [not text[s:e].strip() for s, e, _ in lines]
    units = []
    i = 0
    while i < len(lines):
        if blank[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(lines) and not blank[j + 1]:
            j += 1
        k = j + 1
        while k < len(lines) and blank[k]:
            k += 1
        delim_end = lines[k - 1][2] if k > j + 1 else lines[j][2]
        units.append((lines[i][0], lines[j][1], delim_end))
        i = k
    return units


def _one_pass(text: str, rule: CleanRule, regex: re.Pattern[str] | None) -> tuple[str, list[tuple[int, int]]]:
    """Apply the rule once; returns (new_text, spans into the given text)."""
    if rule.scope == "string":
        spans = _find_matches(text, rule, regex)
        replacement = "" if rule.action == "remove" else rule.replace_with
        return _splice(text, spans, replacement) if spans else text, spans

    units = _line_units(text) if rule.scope == "line" else _paragraph_units(text)
    if rule.action == "remove":
        removed = []
        for start, end, delim_end in units:
            if _find_matches(text[start:end], rule, regex):
                removed.append((start, end, delim_end))
        if not removed:
            return text, []
        new_text = _splice(text, [(s, d) for s, _, d in removed], "")
        return new_text, [(s, e) for s, e, _ in removed]

    # replace: substitute matches inside each unit, offsets kept global
    all_spans: list[tuple[int, int]] = []
    for start, end, _ in units:
        for s, e in _find_matches(text[start:end], rule, regex):
            all_spans.append((start + s, start + e))
    if not all_spans:
        return text, []
    return _splice(text, all_spans, rule.replace_with), all_spans


def apply_rule(doc: Document | str, rule: CleanRule) -> CleanResult:
    """Apply one clean rule to a document's text.

    With fixpoint=true the pass repeats until no matches remain, bounded at
    100 iterations. Reported span offsets index the original text (spans are
    sampled from the first pass only).
    """
    regex = validate_rule(rule)
    original = doc.text if isinstance(doc, Document) else doc

    text = original
    total = 0
    first_spans: list[tuple[int, int]] = []
    passes = 0
    while True:
        new_text, spans = _one_pass(text, rule, regex)
        passes += 1
        if passes == 1:
            first_spans = spans[:_MAX_SPANS]
        total += len(spans)
        text = new_text
        if not spans or not rule.fixpoint:
            break
        if passes >= _FIXPOINT_LIMIT:
            raise GardenError("fixpoint_divergence", "rule still matching after 100 passes")

    samples = [
        MatchSpan(
            start=s,
            end=e,
            context=original[max(0, s - _CONTEXT_CHARS) : min(len(original), e + _CONTEXT_CHARS)],
        )
        for s, e in first_spans
    ]
    return CleanResult(text=text, matches=total, spans_sample=samples)


def clean_pipeline_stage(doc: Document, rules: Iterable[CleanRule]) -> tuple[Document, list[int]]:
    """Apply rules in order; returns the cleaned document and per-rule match counts.

    Documents whose text becomes empty are passed through unchanged in
    count terms; dropping them is the job of a downstream length filter.
    """
    text = doc.text
    counts = []
    for rule in rules:
        result = apply_rule(text, rule)
        counts.append(result.matches)
        text = result.text
    if text == doc.text:
        return doc, counts
    return dc_replace(doc, text=text), counts
