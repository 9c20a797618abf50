"""Seeded reservoir sampling (Algorithm R), input order preserved.

A leaf module so both the analyzer and pipeline stages can sample without
import cycles. Sampling is a sequential single pass, which is what makes
it independent of the worker count.
"""

from __future__ import annotations

import random
from typing import Iterable, TypeVar

T = TypeVar("T")


def reservoir_sample(items: Iterable[T], k: int, seed: int) -> list[T]:
    """Uniform sample of min(k, N) items, returned in input order."""
    if k < 1:
        raise ValueError(f"sample size must be >= 1, got {k}")
    rng = random.Random(seed)
    reservoir: list[tuple[int, T]] = []
    for i, item in enumerate(items):
        if i < k:
            reservoir.append((i, item))
        else:
            j = rng.randrange(i + 1)
            if j < k:
                reservoir[j] = (i, item)
    reservoir.sort(key=lambda pair: pair[0])
    return [item for _, item in reservoir]
