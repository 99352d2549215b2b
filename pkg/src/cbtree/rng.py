"""Seeded, splittable random streams.

A stream is identified by ``(seed, stream_id)`` plus an optional path of child
indices. Streams map onto numpy ``SeedSequence`` spawn keys, so distinct ids give
independent PCG64 generators and identical ids reproduce identical draws.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RandomStream", "as_generator"]


@dataclass(frozen=True)
class RandomStream:
    """Reproducible random stream.

    Parameters
    ----------
    seed : int
        Root entropy (64-bit).
    stream_id : int
        Stream identifier; different ids are statistically independent.
    path : tuple of int
        Child indices appended by :meth:`child`.
    """

    seed: int = 0
    stream_id: int = 0
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")

    def child(self, i: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id, self.path + (int(i),))

    def seed_sequence(self) -> np.random.SeedSequence:
        key = (int(self.stream_id),) + tuple(int(p) for p in self.path)
        return np.random.SeedSequence(int(self.seed), spawn_key=key)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def as_generator(rng) -> np.random.Generator:
    """Accept a RandomStream, a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return RandomStream(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")
