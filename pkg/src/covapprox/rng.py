"""Reproducible random streams.

A stream is the pair ``(seed, stream_id)``. Its generator is numpy's Philox4x64
counter-based bit generator keyed by ``SeedSequence([seed, stream_id])``, so
distinct stream ids give statistically independent sequences without any
shared state, and a given pair always reproduces the same draws.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self) -> np.random.Generator:
        key = np.random.SeedSequence([int(self.seed), int(self.stream_id)]).generate_state(2, np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> "RngStream":
        """Child stream for task ``index``; depends only on (seed, stream_id, index)."""
        child = np.random.SeedSequence([int(self.stream_id), int(index), 0x5EED]).generate_state(1, np.uint64)[0]
        return RngStream(int(self.seed), int(child))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"expected RngStream, Generator or int seed, got {type(rng).__name__}")
