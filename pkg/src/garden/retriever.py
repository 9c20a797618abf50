"""Embedded full-text search: sharded inverted index with BM25 ranking.

Documents are routed to shards by a stable hash of their id; document
frequencies, corpus size and average document length live in a global
manifest, so scores are independent of the shard count and sharding stays
a pure storage/parallelism knob.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import struct
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document
from .errors import GardenError
from .textutil import tokenize

__all__ = [
    "tokenize",
    "Posting",
    "ShardIndex",
    "IndexManifest",
    "SearchHit",
    "build_index",
    "bm25_score",
    "search",
    "snippet",
    "write_index",
    "load_index",
]

DEFAULT_NUM_SHARDS = 20
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
SNIPPET_WINDOW = 160

_SHARD_MAGIC = b"GSRD"
_SHARD_VERSION = 1
_MANIFEST_VERSION = 1


@dataclass(frozen=True)
class Posting:
    ordinal: int  # shard-local document ordinal
    tf: int


@dataclass
class ShardIndex:
    shard_id: int
    postings: dict[str, list[Posting]] = field(default_factory=dict)  # sorted by ordinal
    doc_ids: list[str] = field(default_factory=list)
    doc_texts: list[str] = field(default_factory=list)  # stored for snippets
    doc_lengths: list[int] = field(default_factory=list)

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    def term_frequency(self, term: str, ordinal: int) -> int:
        plist = self.postings.get(term, [])
        i = bisect_left(plist, ordinal, key=lambda p: p.ordinal)
        if i < len(plist) and plist[i].ordinal == ordinal:
            return plist[i].tf
        return 0


@dataclass
class IndexManifest:
    num_shards: int
    total_docs: int
    total_tokens: int
    avgdl: float
    k1: float
    b: float
    df: dict[str, int] = field(default_factory=dict)
    version: int = _MANIFEST_VERSION


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    score: float
    snippet: str


def route_shard(doc_id: str, num_shards: int) -> int:
    """Stable routing: blake2b of the doc id modulo the shard count."""
    digest = hashlib.blake2b(doc_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % num_shards


def build_index(
    docs: Iterable[Document],
    num_shards: int = DEFAULT_NUM_SHARDS,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> tuple[IndexManifest, list[ShardIndex]]:
    """Tokenize and index a corpus; global stats are aggregated exactly."""
    if num_shards < 1:
        raise GardenError("bad_shards", "num_shards must be >= 1")
    shards = [ShardIndex(shard_id=i) for i in range(num_shards)]
    raw_postings: list[dict[str, dict[int, int]]] = [{} for _ in range(num_shards)]
    df: dict[str, int] = {}
    total_docs = 0
    total_tokens = 0

    for doc in docs:
        total_docs += 1
        shard = shards[route_shard(doc.id, num_shards)]
        terms = tokenize(doc.text)
        ordinal = shard.doc_count
        shard.doc_ids.append(doc.id)
        shard.doc_texts.append(doc.text)
        shard.doc_lengths.append(len(terms))
        total_tokens += len(terms)
        counts: dict[str, int] = {}
        for term in terms:
            counts[term] = counts.get(term, 0) + 1
        bucket = raw_postings[shard.shard_id]
        for term, tf in counts.items():
            bucket.setdefault(term, {})[ordinal] = tf
            df[term] = df.get(term, 0) + 1

    if total_docs == 0:
        raise GardenError("empty_corpus", "cannot index an empty corpus")

    for shard in shards:
        bucket = raw_postings[shard.shard_id]
        shard.postings = {
            term: [Posting(o, tf) for o, tf in sorted(ordinals.items())]
            for term, ordinals in sorted(bucket.items())
        }

    manifest = IndexManifest(
        num_shards=num_shards,
        total_docs=total_docs,
        total_tokens=total_tokens,
        avgdl=total_tokens / total_docs,
        k1=k1,
        b=b,
        df=df,
    )
    return manifest, shards


def idf(manifest: IndexManifest, term: str) -> float:
    """ln(1 + (N - df + 0.5)/(df + 0.5)); nonnegative by construction."""
    n_t = manifest.df.get(term, 0)
    return math.log(1.0 + (manifest.total_docs - n_t + 0.5) / (n_t + 0.5))


def bm25_score(
    manifest: IndexManifest,
    shard: ShardIndex,
    query_terms: Sequence[str],
    ordinal: int,
) -> float:
    """BM25 with global N/df/avgdl; absent terms contribute zero."""
    dl = shard.doc_lengths[ordinal]
    norm = manifest.k1 * (1.0 - manifest.b + manifest.b * dl / manifest.avgdl)
    score = 0.0
    for term in dict.fromkeys(query_terms):  # distinct, stable order
        tf = shard.term_frequency(term, ordinal)
        if tf == 0:
            continue
        score += idf(manifest, term) * (tf * (manifest.k1 + 1.0)) / (tf + norm)
    return score


def search(
    manifest: IndexManifest,
    shards: Sequence[ShardIndex],
    query: str,
    k: int = 10,
) -> list[SearchHit]:
    """Global top-k over all shards; ties break by doc id ascending."""
    if k < 1:
        raise GardenError("bad_topk", "k must be >= 1")
    terms = list(dict.fromkeys(tokenize(query)))
    if not terms:
        return []
    scored: list[tuple[float, str, int, int]] = []  # (score, doc_id, shard, ordinal)
    for shard in shards:
        accumulator: dict[int, float] = {}
        for term in terms:
            plist = shard.postings.get(term)
            if not plist:
                continue
            term_idf = idf(manifest, term)
            for posting in plist:
                dl = shard.doc_lengths[posting.ordinal]
                norm = manifest.k1 * (1.0 - manifest.b + manifest.b * dl / manifest.avgdl)
                gain = term_idf * (posting.tf * (manifest.k1 + 1.0)) / (posting.tf + norm)
                accumulator[posting.ordinal] = accumulator.get(posting.ordinal, 0.0) + gain
        for ordinal, score in accumulator.items():
            if score > 0.0:
                scored.append((score, shard.doc_ids[ordinal], shard.shard_id, ordinal))
    scored.sort(key=lambda item: (-item[0], item[1]))
    hits = []
    for score, doc_id, shard_id, ordinal in scored[:k]:
        text = shards[shard_id].doc_texts[ordinal]
        hits.append(SearchHit(doc_id=doc_id, score=score, snippet=snippet(text, terms)))
    return hits


def snippet(text: str, query_terms: Sequence[str], window: int = SNIPPET_WINDOW) -> str:
    """Window centered on the first query-term occurrence, terms marked with [[...]].

    Without a match the text prefix is returned unmarked.
    """
    terms = [t for t in dict.fromkeys(query_terms) if t]
    if not terms or not text:
        return text[:window]
    pattern = re.compile(
        "|".join(re.escape(t) for t in sorted(terms, key=len, reverse=True)),
        re.IGNORECASE,
    )
    first = pattern.search(text)
    if first is None:
        return text[:window]
    span = first.end() - first.start()
    start = max(0, first.start() - max(0, (window - span) // 2))
    if start + window > len(text):
        start = max(0, len(text) - window)
    segment = text[start : start + window]
    return pattern.sub(lambda m: f"[[{m.group(0)}]]", segment)


# --- on-disk layout: manifest.json + shard-NN.idx --------------------------


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def read(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise GardenError("truncated_index", "shard file ends prematurely")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))

    def read_str(self) -> str:
        (n,) = self.unpack("<I")
        return self.read(n).decode("utf-8")


def write_index(manifest: IndexManifest, shards: Sequence[ShardIndex], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_doc = {
        "version": manifest.version,
        "num_shards": manifest.num_shards,
        "total_docs": manifest.total_docs,
        "total_tokens": manifest.total_tokens,
        "avgdl": manifest.avgdl,
        "k1": manifest.k1,
        "b": manifest.b,
        "df": {t: manifest.df[t] for t in sorted(manifest.df)},
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest_doc, ensure_ascii=False, indent=2, sort_keys=True), encoding="utf-8"
    )
    for shard in shards:
        buf = [
            _SHARD_MAGIC,
            struct.pack("<HHI", _SHARD_VERSION, shard.shard_id, shard.doc_count),
        ]
        for i in range(shard.doc_count):
            buf.append(_pack_str(shard.doc_ids[i]))
            buf.append(_pack_str(shard.doc_texts[i]))
            buf.append(struct.pack("<I", shard.doc_lengths[i]))
        terms = sorted(shard.postings)
        buf.append(struct.pack("<I", len(terms)))
        for term in terms:
            plist = shard.postings[term]
            buf.append(_pack_str(term))
            buf.append(struct.pack("<I", len(plist)))
            for posting in plist:
                buf.append(struct.pack("<II", posting.ordinal, posting.tf))
        (out / f"shard-{shard.shard_id:02d}.idx").write_bytes(b"".join(buf))
    return out


def load_index(index_dir: str | Path) -> tuple[IndexManifest, list[ShardIndex]]:
    root = Path(index_dir)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise GardenError("index_not_found", f"no manifest.json under {root}")
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    if doc.get("version") != _MANIFEST_VERSION:
        raise GardenError("unsupported_version", f"manifest version {doc.get('version')}")
    manifest = IndexManifest(
        num_shards=doc["num_shards"],
        total_docs=doc["total_docs"],
        total_tokens=doc["total_tokens"],
        avgdl=doc["avgdl"],
        k1=doc["k1"],
        b=doc["b"],
        df=doc["df"],
    )
    shards = []
    for shard_id in range(manifest.num_shards):
        data = (root / f"shard-{shard_id:02d}.idx").read_bytes()
        reader = _Reader(data)
        if reader.read(4) != _SHARD_MAGIC:
            raise GardenError("bad_magic", f"shard {shard_id} is not an index file")
        version, stored_id, doc_count = reader.unpack("<HHI")
        if version != _SHARD_VERSION:
            raise GardenError("unsupported_version", f"shard file version {version}")
        shard = ShardIndex(shard_id=stored_id)
        for _ in range(doc_count):
            shard.doc_ids.append(reader.read_str())
            shard.doc_texts.append(reader.read_str())
            (length,) = reader.unpack("<I")
            shard.doc_lengths.append(length)
        (n_terms,) = reader.unpack("<I")
        for _ in range(n_terms):
            term = reader.read_str()
            (n_postings,) = reader.unpack("<I")
            plist = []
            for _ in range(n_postings):
                ordinal, tf = reader.unpack("<II")
                plist.append(Posting(ordinal, tf))
            shard.postings[term] = plist
        shards.append(shard)
    return manifest, shards
