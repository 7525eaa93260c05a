"""Deterministic corpus sampling.

Selection is a function of (member ids, n, seed) only: the pool is sorted
by transition id before drawing, so file order, ingestion order, and
platform never change which transitions make the split.
"""

from __future__ import annotations

import random

from ..trajectory import Transition

__all__ = ["sample_split"]


def sample_split(transitions: list[Transition], n: int, seed: int) -> list[Transition]:
    """n distinct transitions drawn without replacement; output sorted by id."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > len(transitions):
        raise ValueError(f"cannot sample {n} from {len(transitions)} transitions")
    pool = sorted(transitions, key=lambda t: t.id)
    rng = random.Random(seed)
    chosen = rng.sample(pool, n)
    return sorted(chosen, key=lambda t: t.id)
