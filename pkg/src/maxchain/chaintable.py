"""Hashing with chaining, instrumented for max-load measurement.

The central statistic is the size of the most loaded bucket: the longest
chain.  A worst-case lookup walks exactly that chain, which is why the
statistic matters for the chained-table application.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

HashEvaluator = Callable[[int], int]


@dataclass(frozen=True)
class LoadProfile:
    """Per-bucket occupancy counts for one key set under one hash function."""

    m: int
    counts: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.counts) != self.m:
            raise ValueError("counts length must equal bucket count")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative bucket count")
        if sum(self.counts) != self.n:
            raise ValueError("counts must sum to the number of keys")


def build_profile(keys: Sequence[int], h: HashEvaluator, m: int) -> LoadProfile:
    """Histogram of h over a duplicate-free key list."""
    seen = set()
    counts = [0] * m
    for x in keys:
        if x in seen:
            raise ValueError(f"duplicate key {x}")
        seen.add(x)
        y = h(x)
        if not 0 <= y < m:
            raise ValueError(f"hash value {y} outside [0, {m})")
        counts[y] += 1
    return LoadProfile(m=m, counts=tuple(counts), n=len(keys))


def max_load(profile: LoadProfile) -> int:
    """Occupancy of the most loaded bucket; requires at least one key."""
    if profile.n < 1:
        raise ValueError("profile holds no keys")
    return max(profile.counts)


def argmax_bucket(profile: LoadProfile) -> int:
    """Smallest bucket index attaining the max load (diagnostic only)."""
    best = max_load(profile)
    return profile.counts.index(best)


class ChainedTable:
    """A chained hash table that counts probes.

    A probe is one stored key examined during lookup.  Successful lookup
    of the i-th key in its chain costs i+1 probes; an unsuccessful lookup
    scans the whole chain.
    """

    def __init__(self, h: HashEvaluator, m: int):
        self._h = h
        self.m = m
        self.buckets: list[list[int]] = [[] for _ in range(m)]
        self.n = 0

    def insert(self, key: int) -> bool:
        """Append the key to its chain; returns False (no-op) if present."""
        chain = self.buckets[self._h(key)]
        if key in chain:
            return False
        chain.append(key)
        self.n += 1
        return True

    def lookup(self, key: int) -> tuple[bool, int]:
        """(found, probes)."""
        chain = self.buckets[self._h(key)]
        for i, stored in enumerate(chain):
            if stored == key:
                return True, i + 1
        return False, len(chain)

    def load_profile(self) -> LoadProfile:
        return LoadProfile(
            m=self.m, counts=tuple(len(c) for c in self.buckets), n=self.n
        )

    def max_chain(self) -> int:
        return max_load(self.load_profile())
