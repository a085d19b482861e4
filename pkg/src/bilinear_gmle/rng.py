"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by a tuple of
non-negative integers, e.g. ``(master_seed, cell, replication)``. Streams with
different keys are statistically independent and do not depend on the order
in which they are created, so replications can be farmed out to any number of
workers.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int], np.random.Generator]


def stream(*key: int) -> np.random.Generator:
    if not key:
        raise ValueError("stream key must contain at least one integer")
    if any(int(k) < 0 for k in key):
        raise ValueError(f"stream key entries must be non-negative, got {key}")
    seq = np.random.SeedSequence([int(k) for k in key])
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        return stream(int(seed))
    return stream(*seed)
