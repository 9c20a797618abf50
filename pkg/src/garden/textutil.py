"""Character classification and tokenization shared by filters, dedup and retrieval.

One tokenizer serves both the search index and the dedup shingler so that
"same text" means the same thing on both paths.
"""

from __future__ import annotations

import unicodedata
from functools import lru_cache

# CJK unified ideograph ranges (BMP + extensions A-F).
_HAN_RANGES = (
    (0x4E00, 0x9FFF),
    (0x3400, 0x4DBF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2B73F),
    (0x2B740, 0x2B81F),
    (0x2B820, 0x2CEAF),
    (0x2CEB0, 0x2EBEF),
)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def is_han(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _HAN_RANGES)


@lru_cache(maxsize=8192)
def is_latin_letter(ch: str) -> bool:
    if not ch.isalpha():
        return False
    if ch.isascii():
        return True
    return unicodedata.name(ch, "").startswith("LATIN")


def tokenize(text: str) -> list[str]:
    """Split text into search/shingle terms.

    NFC-normalizes, casefolds, splits on any non-alphanumeric scalar and
    drops empty tokens. Han characters are emitted as single-character
    tokens so Chinese text is searchable without a segmenter.
    """
    text = nfc(text).casefold()
    tokens: list[str] = []
    current: list[str] = []
    for ch in text:
        if is_han(ch):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        elif ch.isalnum():
            current.append(ch)
        else:
            if current:
                tokens.append("".join(current))
                current = []
    if current:
        tokens.append("".join(current))
    return tokens
