"""Document model, JSONL (de)serialization and raw-source reformatting.

The canonical record is one JSON object per line with a mandatory "text"
key; "id" and "source" are optional and every other key is carried along
as metadata. Plain-text and HTML inputs are reformatted into the same
shape so the rest of the pipeline only ever sees Documents.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO, Iterable

from .errors import GardenError
from .textutil import nfc

RESERVED_KEYS = ("text", "id", "source")

# RecordError kinds
MALFORMED_JSON = "malformed-json"
MISSING_TEXT_FIELD = "missing-text-field"
INVALID_ENCODING = "invalid-encoding"


@dataclass
class Document:
    """One corpus record: the trainable text plus provenance and metadata."""

    id: str
    text: str
    source: str = ""
    meta: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RecordError:
    line_number: int
    kind: str  # malformed-json | missing-text-field | invalid-encoding
    detail: str = ""


def _has_unencodable(text: str) -> bool:
    try:
        text.encode("utf-8")
    except UnicodeEncodeError:
        return True
    return False


def parse_jsonl_line(line: str, line_number: int, source: str = "") -> Document | RecordError:
    """Parse one physical JSONL line into a Document.

    The "text" value becomes Document.text (NFC-normalized); "id" and
    "source" map to their fields; every other key lands in meta verbatim.
    A missing id is synthesized as "<source>#<line_number>".
    """
    if _has_unencodable(line):
        return RecordError(line_number, INVALID_ENCODING, "line is not valid UTF-8")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        return RecordError(line_number, MALFORMED_JSON, str(exc))
    if not isinstance(obj, dict):
        return RecordError(line_number, MALFORMED_JSON, "line is not a JSON object")
    text = obj.get("text")
    if not isinstance(text, str):
        detail = "no \"text\" key" if "text" not in obj else "\"text\" is not a string"
        return RecordError(line_number, MISSING_TEXT_FIELD, detail)
    doc_id = str(obj["id"]) if "id" in obj else f"{source}#{line_number}"
    doc_source = str(obj["source"]) if "source" in obj else source
    meta = {k: v for k, v in obj.items() if k not in RESERVED_KEYS}
    return Document(id=doc_id, text=nfc(text), source=doc_source, meta=meta)


def serialize_document(doc: Document) -> str:
    """Serialize a Document as one JSONL line with deterministic key order.

    Key order is text, id, source, then meta keys sorted by string
    comparison, so output files are bit-reproducible.
    """
    obj: dict[str, Any] = {"text": doc.text, "id": doc.id, "source": doc.source}
    for key in sorted(doc.meta):
        obj[key] = doc.meta[key]
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def reformat_stream(
    data: bytes | BinaryIO,
    format: str,
    source: str = "",
    strict: bool = False,
) -> tuple[list[Document], list[RecordError]]:
    """Turn a raw byte stream into Documents plus per-record errors.

    format "jsonl" treats each non-blank line as a record; "plain-text"
    treats blank-line-separated blocks as documents; "html" produces a
    single document via extract_html_text. Output order matches input
    order and len(docs) + len(errors) equals the record count.
    """
    if hasattr(data, "read"):
        raw = data.read()  # type: ignore[union-attr]
    else:
        raw = data
    if not isinstance(raw, bytes):
        raise GardenError("unreadable_input", "reformat_stream expects bytes")

    docs: list[Document] = []
    errors: list[RecordError] = []

    def fail(err: RecordError) -> None:
        if strict:
            raise GardenError(err.kind, f"line {err.line_number}: {err.detail}")
        errors.append(err)

    if format == "jsonl":
        for line_number, raw_line in enumerate(raw.split(b"\n"), start=1):
            if not raw_line.strip():
                continue
            try:
                line = raw_line.decode("utf-8")
            except UnicodeDecodeError as exc:
                fail(RecordError(line_number, INVALID_ENCODING, str(exc)))
                continue
            parsed = parse_jsonl_line(line, line_number, source=source)
            if isinstance(parsed, RecordError):
                fail(parsed)
            else:
                docs.append(parsed)
    elif format == "plain-text":
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            fail(RecordError(1, INVALID_ENCODING, str(exc)))
            return docs, errors
        for n, block in enumerate(_split_blocks(text), start=1):
            docs.append(Document(id=f"{source}#{n}", text=nfc(block), source=source))
    elif format == "html":
        try:
            html = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            fail(RecordError(1, INVALID_ENCODING, str(exc)))
            return docs, errors
        docs.append(Document(id=f"{source}#1", text=nfc(extract_html_text(html)), source=source))
    else:
        raise GardenError("unknown_format", f"unknown reformat format: {format!r}")
    return docs, errors


def _split_blocks(text: str) -> list[str]:
    blocks = re.split(r"\n[ \t]*\n+", text)
    return [b.strip("\n") for b in blocks if b.strip()]


# --- HTML extraction -------------------------------------------------------
#
# Fixed rule set, not a DOM parser: drop script/style/comments, strip known
# tags (block-level ones become newline boundaries), decode the common
# entities, bound blank runs. Unknown tags are left as literal text.

_BLOCK_TAGS = frozenset(
    """p div br hr li ul ol dl dt dd table thead tbody tr td th h1 h2 h3 h4 h5 h6
    blockquote pre section article header footer nav aside main figure figcaption
    form fieldset address html head body title""".split()
)
_INLINE_TAGS = frozenset(
    """a b i u s em strong span small sub sup code abbr mark q cite time wbr
    img input label button select option textarea iframe video audio source
    picture svg path meta link font center big tt noscript canvas""".split()
)

_COMMENT_RE = re.compile(r"<!--.*?(?:-->|$)", re.S)
_DOCTYPE_RE = re.compile(r"<!DOCTYPE[^>]*>", re.I)
_SCRIPT_STYLE_RE = re.compile(r"<\s*(script|style)\b[^>]*>.*?<\s*/\s*\1\s*>", re.S | re.I)
_TAG_RE = re.compile(r"<\s*/?\s*([a-zA-Z][a-zA-Z0-9]*)(?:\s[^<>]*)?/?\s*>")
_ENTITY_RE = re.compile(r"&(amp|lt|gt|quot|#[0-9]+|#[xX][0-9a-fA-F]+);")

_NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"'}


def _decode_entity(match: re.Match[str]) -> str:
    body = match.group(1)
    if body in _NAMED_ENTITIES:
        return _NAMED_ENTITIES[body]
    try:
        cp = int(body[2:], 16) if body[1] in "xX" else int(body[1:])
        if 0 < cp <= 0x10FFFF and not 0xD800 <= cp <= 0xDFFF:
            return chr(cp)
    except ValueError:
        pass
    return match.group(0)


def extract_html_text(html: str) -> str:
    """Best-effort text extraction from (possibly malformed) HTML.

    Script/style contents are dropped, recognized tags stripped with
    block-level tags acting as newline boundaries, the entities
    &amp; &lt; &gt; &quot; and numeric &#NN;/&#xNN; decoded, and runs of
    more than two newlines collapsed to two.
    """
    s = _COMMENT_RE.sub("", html)
    s = _DOCTYPE_RE.sub("", s)
    s = _SCRIPT_STYLE_RE.sub("", s)

    parts: list[str] = []
    pending_break = False
    pos = 0

    def flush(segment: str) -> None:
        nonlocal pending_break
        if not segment.strip():
            return
        if parts and pending_break:
            parts.append("\n")
        parts.append(segment)
        pending_break = False

    for m in _TAG_RE.finditer(s):
        name = m.group(1).lower()
        if name not in _BLOCK_TAGS and name not in _INLINE_TAGS:
            continue  # unknown tag: stays literal text
        flush(s[pos:m.start()])
        if name in _BLOCK_TAGS:
            pending_break = True
        pos = m.end()
    flush(s[pos:])

    out = "".join(parts)
    out = _ENTITY_RE.sub(_decode_entity, out)
    out = re.sub(r"[ \t]*\n[ \t]*", "\n", out)
    out = re.sub(r"\n{3,}", "\n\n", out)
    return out.strip()


# --- file helpers ----------------------------------------------------------


def iter_corpus_paths(path: str | Path) -> list[Path]:
    """Resolve a corpus argument to a sorted list of JSONL files."""
    p = Path(path)
    if p.is_dir():
        return sorted(q for q in p.iterdir() if q.suffix == ".jsonl" and q.is_file())
    return [p]


def load_documents(path: str | Path, strict: bool = False) -> tuple[list[Document], list[RecordError]]:
    """Read a JSONL file or a directory of .jsonl files into Documents."""
    docs: list[Document] = []
    errors: list[RecordError] = []
    for file in iter_corpus_paths(path):
        got, errs = reformat_stream(file.read_bytes(), "jsonl", source=file.stem, strict=strict)
        docs.extend(got)
        errors.extend(errs)
    return docs, errors


def write_documents(docs: Iterable[Document], path: str | Path) -> int:
    """Write Documents as JSONL; returns the number of lines written."""
    n = 0
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(serialize_document(doc))
            fh.write("\n")
            n += 1
    return n


def documents_to_jsonl(docs: Iterable[Document]) -> str:
    return "".join(serialize_document(d) + "\n" for d in docs)
