"""Near-duplicate removal with MinHash signatures and banded LSH.

Documents are represented as sets of hashed 10-token shingles; 128 seeded
permutations give a signature whose component-match rate estimates Jaccard
similarity. Banding at 16x8 puts the collision threshold at
(1/16)^(1/8) ~= 0.707, and candidate pairs are verified against the
estimator before clustering, so the final criterion is exactly
estimate_jaccard >= threshold.
"""

from __future__ import annotations

import hashlib
import struct
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document
from .errors import GardenError
from .textutil import tokenize

DEFAULT_NGRAM = 10
DEFAULT_NUM_PERM = 128
DEFAULT_BANDS = 16
DEFAULT_THRESHOLD = 0.7

# Permutations are affine maps over GF(2^31 - 1). Drawing a from the whole
# field makes the map wrap densely (near min-wise independent); operands stay
# below 2^62 so uint64 arithmetic is exact.
_MERSENNE_31 = (1 << 31) - 1


@dataclass
class ShingleSet:
    doc_id: str
    hashes: frozenset[int]  # 64-bit shingle hashes


@dataclass
class MinHashSignature:
    doc_id: str
    values: np.ndarray  # uint64, one minimum per permutation
    num_perm: int
    seed: int


@dataclass
class DupCluster:
    representative: str  # member with the smallest input ordinal
    members: list[str]  # in input order, representative first
    similarities: dict[tuple[str, str], float] = field(default_factory=dict)


def _hash64(data: bytes, seed: int) -> int:
    key = struct.pack("<q", seed)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8, key=key).digest(), "little")


def shingles(text: str, n: int = DEFAULT_NGRAM, seed: int = 0, doc_id: str = "", mode: str = "word") -> ShingleSet:
    """Hash the n-token windows of a text (single window if under n tokens).

    Tokenization is shared with the retriever, so whitespace and casing
    variants shingle identically. Zero tokens yield an empty set, which
    exempts the document from dedup.
    """
    if mode == "word":
        units: Sequence[str] = tokenize(text)
        joiner = " "
    elif mode == "char":
        units = text
        joiner = ""
    else:
        raise GardenError("unknown_shingle_mode", f"unknown shingle mode {mode!r}")
    if not units:
        return ShingleSet(doc_id=doc_id, hashes=frozenset())
    if len(units) < n:
        windows = [joiner.join(units)]
    else:
        windows = [joiner.join(units[i : i + n]) for i in range(len(units) - n + 1)]
    return ShingleSet(
        doc_id=doc_id,
        hashes=frozenset(_hash64(w.encode("utf-8"), seed) for w in windows),
    )


def _permutation_params(num_perm: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(1, _MERSENNE_31, size=num_perm, dtype=np.uint64)
    b = rng.integers(0, _MERSENNE_31, size=num_perm, dtype=np.uint64)
    return a, b


def minhash(s: ShingleSet, num_perm: int = DEFAULT_NUM_PERM, seed: int = 0) -> MinHashSignature:
    """Per-permutation minimum of universal-hashed shingle hashes."""
    if not s.hashes:
        raise GardenError("no_shingles", f"document {s.doc_id!r} has no shingles")
    a, b = _permutation_params(num_perm, seed)
    hashes = np.fromiter(s.hashes, dtype=np.uint64, count=len(s.hashes))
    reduced = hashes % np.uint64(_MERSENNE_31)
    permuted = (a[:, None] * reduced[None, :] + b[:, None]) % np.uint64(_MERSENNE_31)
    return MinHashSignature(
        doc_id=s.doc_id,
        values=permuted.min(axis=1),
        num_perm=num_perm,
        seed=seed,
    )


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of equal signature components; unbiased Jaccard estimator."""
    if a.num_perm != b.num_perm or a.seed != b.seed:
        raise GardenError("signature_mismatch", "signatures use different num_perm or seed")
    return float(np.count_nonzero(a.values == b.values)) / a.num_perm


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    """|A intersect B| / |A union B|; 0 when both sets are empty."""
    if not a.hashes and not b.hashes:
        return 0.0
    return len(a.hashes & b.hashes) / len(a.hashes | b.hashes)


class LshIndex:
    """Banded bucket structure over signatures: bands x rows = num_perm."""

    def __init__(self, bands: int = DEFAULT_BANDS, num_perm: int = DEFAULT_NUM_PERM):
        if num_perm % bands != 0:
            raise GardenError("bad_banding", f"{bands} bands do not divide {num_perm} permutations")
        self.bands = bands
        self.rows = num_perm // bands
        self.num_perm = num_perm
        self._buckets: list[dict[bytes, list[int]]] = [defaultdict(list) for _ in range(bands)]

    @property
    def implied_threshold(self) -> float:
        return (1.0 / self.bands) ** (1.0 / self.rows)

    def insert(self, ordinal: int, sig: MinHashSignature) -> None:
        for band in range(self.bands):
            key = sig.values[band * self.rows : (band + 1) * self.rows].tobytes()
            self._buckets[band][key].append(ordinal)

    def candidate_pairs(self) -> set[tuple[int, int]]:
        pairs: set[tuple[int, int]] = set()
        for band_buckets in self._buckets:
            for bucket in band_buckets.values():
                if len(bucket) < 2:
                    continue
                for i in range(len(bucket)):
                    for j in range(i + 1, len(bucket)):
                        x, y = bucket[i], bucket[j]
                        pairs.add((x, y) if x < y else (y, x))
        return pairs


class _UnionFind:
    def __init__(self) -> None:
        self._parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        parent = self._parent.setdefault(x, x)
        if parent != x:
            parent = self.find(parent)
            self._parent[x] = parent
        return parent

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # anchor on the smaller ordinal so representatives are stable
            if ry < rx:
                rx, ry = ry, rx
            self._parent[ry] = rx


def dedup_corpus(
    docs: Sequence[Document],
    threshold: float = DEFAULT_THRESHOLD,
    ngram: int = DEFAULT_NGRAM,
    num_perm: int = DEFAULT_NUM_PERM,
    bands: int = DEFAULT_BANDS,
    seed: int = 0,
    mode: str = "word",
) -> tuple[list[Document], list[DupCluster], dict]:
    """Two-pass near-duplicate removal.

    Pass 1 shingles and signs every document and fills the LSH buckets;
    pass 2 verifies within-bucket candidate pairs with the signature
    estimator and union-finds clusters. Each cluster keeps the member with
    the smallest input ordinal; survivor order matches input order.
    """
    if not 0.0 < threshold <= 1.0:
        raise GardenError("bad_threshold", f"threshold must be in (0, 1], got {threshold}")
    docs = list(docs)
    index = LshIndex(bands=bands, num_perm=num_perm)
    signatures: dict[int, MinHashSignature] = {}
    for ordinal, doc in enumerate(docs):
        sset = shingles(doc.text, n=ngram, seed=seed, doc_id=doc.id, mode=mode)
        if not sset.hashes:
            continue  # token-free document: exempt
        sig = minhash(sset, num_perm=num_perm, seed=seed)
        signatures[ordinal] = sig
        index.insert(ordinal, sig)

    candidates = index.candidate_pairs()
    uf = _UnionFind()
    verified = 0
    for x, y in sorted(candidates):
        if estimate_jaccard(signatures[x], signatures[y]) >= threshold:
            uf.union(x, y)
            verified += 1

    groups: dict[int, list[int]] = defaultdict(list)
    for ordinal in signatures:
        root = uf.find(ordinal)
        groups[root].append(ordinal)

    clusters: list[DupCluster] = []
    dropped: set[int] = set()
    for root in sorted(groups):
        members = sorted(groups[root])
        if len(members) < 2:
            continue
        dropped.update(members[1:])
        sims = {}
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                sims[(docs[a].id, docs[b].id)] = estimate_jaccard(signatures[a], signatures[b])
        clusters.append(
            DupCluster(
                representative=docs[members[0]].id,
                members=[docs[m].id for m in members],
                similarities=sims,
            )
        )

    kept = [doc for ordinal, doc in enumerate(docs) if ordinal not in dropped]
    report = {
        "input_count": len(docs),
        "kept": len(kept),
        "dropped": len(docs) - len(kept),
        "clusters": len(clusters),
        "candidate_pairs": len(candidates),
        "verified_pairs": verified,
        "threshold": threshold,
        "ngram": ngram,
        "num_perm": num_perm,
        "bands": bands,
        "seed": seed,
    }
    return kept, clusters, report


def clusters_to_report(clusters: Iterable[DupCluster]) -> list[dict]:
    """JSON-ready cluster report: representative, members and size."""
    return [
        {
            "representative": c.representative,
            "members": list(c.members),
            "size": len(c.members),
            "pair_estimates": [
                {"a": a, "b": b, "estimate": sim} for (a, b), sim in sorted(c.similarities.items())
            ],
        }
        for c in clusters
    ]
