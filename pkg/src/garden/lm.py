"""Character n-gram language model with add-k smoothing.

Backs the perplexity filter and language identification. Character-level
with a small fixed order keeps models tokenizer-free and cheap to train on
a reference slice of the corpus being curated.
"""

from __future__ import annotations

import io
import math
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import Document
from .errors import ModelError
from .textutil import nfc

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

_MAGIC = b"GNLM"
_VERSION = 1

Context = tuple[str, ...]


@dataclass
class NgramModel:
    order: int
    k: float
    vocab: frozenset[str]  # characters plus BOS/EOS/UNK
    counts: dict[Context, dict[str, int]]
    total_chars_trained: int = 0
    context_totals: dict[Context, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.context_totals:
            self.context_totals = {c: sum(sym.values()) for c, sym in self.counts.items()}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def prob(self, context: Context, symbol: str) -> float:
        """Add-k probability; unseen contexts fall back to uniform 1/V."""
        symbols = self.counts.get(context)
        count = symbols.get(symbol, 0) if symbols else 0
        total = self.context_totals.get(context, 0)
        return (count + self.k) / (total + self.k * self.vocab_size)


def _texts(corpus: Iterable[Document | str]) -> list[str]:
    out = []
    for item in corpus:
        out.append(nfc(item.text if isinstance(item, Document) else item))
    return out


def train(
    corpus: Iterable[Document | str],
    order: int = 5,
    k: float = 0.1,
    min_count: int = 1,
) -> NgramModel:
    """Count order-grams over each text padded with order-1 BOS and one EOS.

    Characters seen fewer than min_count times map to UNK in the vocab.
    """
    if order < 1 or order > 8:
        raise ModelError("bad_order", f"order must be in [1, 8], got {order}")
    if k <= 0:
        raise ModelError("bad_smoothing", f"k must be > 0, got {k}")
    texts = _texts(corpus)
    if not texts:
        raise ModelError("no_training_data", "cannot train on an empty corpus")

    char_counts: Counter[str] = Counter()
    for text in texts:
        char_counts.update(text)
    vocab = frozenset(c for c, n in char_counts.items() if n >= min_count) | {BOS, EOS, UNK}

    counts: dict[Context, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    total = 0
    for text in texts:
        total += len(text)
        syms = [BOS] * (order - 1) + [c if c in vocab else UNK for c in text] + [EOS]
        for i in range(order - 1, len(syms)):
            context = tuple(syms[i - order + 1 : i])
            counts[context][syms[i]] += 1

    frozen = {ctx: dict(sym) for ctx, sym in counts.items()}
    return NgramModel(order=order, k=k, vocab=vocab, counts=frozen, total_chars_trained=total)


def _symbols(model: NgramModel, text: str) -> list[str]:
    body = [c if c in model.vocab else UNK for c in nfc(text)]
    return [BOS] * (model.order - 1) + body + [EOS]


def log_prob(model: NgramModel, text: str) -> float:
    """Natural-log probability of text including the EOS transition."""
    syms = _symbols(model, text)
    total = 0.0
    for i in range(model.order - 1, len(syms)):
        context = tuple(syms[i - model.order + 1 : i])
        total += math.log(model.prob(context, syms[i]))
    return total


def perplexity(model: NgramModel, text: str) -> float:
    """exp(-log_prob / N) with N = number of scalars plus one for EOS."""
    normalized = nfc(text)
    if not normalized:
        raise ModelError("empty_text", "perplexity is undefined for empty text")
    if not model.counts:
        # Untrained model: every step is k/(k*V) = 1/V, so PPL is V exactly;
        # the log/exp route would be off in the last ulp.
        return float(model.vocab_size)
    n = len(normalized) + 1
    return math.exp(-log_prob(model, normalized) / n)


def mean_log_prob(model: NgramModel, text: str) -> float:
    normalized = nfc(text)
    if not normalized:
        raise ModelError("empty_text", "mean log-probability is undefined for empty text")
    return log_prob(model, normalized) / (len(normalized) + 1)


def classify_language(models: dict[str, NgramModel], text: str) -> tuple[str, float]:
    """Pick the tag whose model gives the best per-character mean log-prob.

    Returns (tag, margin) where margin is best minus second-best; ties
    break lexicographically by tag.
    """
    if len(models) < 2:
        raise ModelError("need_two_models", "language classification needs at least 2 models")
    if not nfc(text):
        raise ModelError("empty_text", "cannot classify empty text")
    scored = sorted(
        ((mean_log_prob(model, text), tag) for tag, model in models.items()),
        key=lambda pair: (-pair[0], pair[1]),
    )
    best, second = scored[0], scored[1]
    return best[1], best[0] - second[0]


# --- serialization ---------------------------------------------------------
#
# Little-endian binary: header {magic, version, order, k, vocab size,
# context count, total chars}, sorted vocab strings, then per-context the
# sorted (context, symbol, count) triples.


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self._buf = io.BytesIO(data)

    def read(self, n: int) -> bytes:
        out = self._buf.read(n)
        if len(out) != n:
            raise ModelError("truncated_model", "model file ends prematurely")
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))

    def read_str(self) -> str:
        (n,) = self.unpack("<I")
        return self.read(n).decode("utf-8")


def save_model(model: NgramModel) -> bytes:
    out = io.BytesIO()
    out.write(_MAGIC)
    out.write(
        struct.pack(
            "<HHdIQ",
            _VERSION,
            model.order,
            model.k,
            model.vocab_size,
            model.total_chars_trained,
        )
    )
    for sym in sorted(model.vocab):
        out.write(_pack_str(sym))
    contexts = sorted(model.counts)
    out.write(struct.pack("<I", len(contexts)))
    for context in contexts:
        for sym in context:
            out.write(_pack_str(sym))
        symbols = model.counts[context]
        out.write(struct.pack("<I", len(symbols)))
        for sym in sorted(symbols):
            out.write(_pack_str(sym))
            out.write(struct.pack("<Q", symbols[sym]))
    return out.getvalue()


def load_model(data: bytes) -> NgramModel:
    reader = _Reader(data)
    if reader.read(4) != _MAGIC:
        raise ModelError("bad_magic", "not a model file")
    version, order, k, vocab_size, total_chars = reader.unpack("<HHdIQ")
    if version != _VERSION:
        raise ModelError("unsupported_version", f"model file version {version} is not supported")
    vocab = frozenset(reader.read_str() for _ in range(vocab_size))
    (n_contexts,) = reader.unpack("<I")
    counts: dict[Context, dict[str, int]] = {}
    for _ in range(n_contexts):
        context = tuple(reader.read_str() for _ in range(order - 1))
        (n_symbols,) = reader.unpack("<I")
        symbols: dict[str, int] = {}
        for _ in range(n_symbols):
            sym = reader.read_str()
            (count,) = reader.unpack("<Q")
            symbols[sym] = count
        counts[context] = symbols
    return NgramModel(order=order, k=k, vocab=vocab, counts=counts, total_chars_trained=total_chars)


def load_model_file(path) -> NgramModel:
    from pathlib import Path

    return load_model(Path(path).read_bytes())
