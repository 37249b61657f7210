"""Deterministic counter-based random source.

Every randomized operation in this package draws from a SplitMix64 stream.
Streams are derived, not shared: trial ``i`` of a run with base seed ``s``
uses the stream ``derive_stream(s, i)``, so results are identical no matter
how trials are scheduled across threads or chunks.

The numba and numpy kernel backends reimplement exactly this generator;
``tests/test_kernels.py`` pins them against this module bit for bit.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective mixing of ``z``."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_stream_state(base_seed: int, index: int) -> int:
    """Initial SplitMix64 state for sub-stream ``index`` of ``base_seed``."""
    return mix64(mix64(base_seed) ^ mix64((index + 1) & MASK64))


def rejection_zone(bound: int) -> int:
    """Largest multiple of ``bound`` representable in 64 bits.

    Draws ``u < zone`` reduce to unbiased ``u % bound``.  Returns 0 when
    ``bound`` is a power of two: those draws are taken by masking instead
    and never reject.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound & (bound - 1) == 0:
        return 0
    return (1 << 64) - ((1 << 64) % bound)


class SplitMix64:
    """SplitMix64 generator over explicit 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, state: int):
        self._state = state & MASK64

    @classmethod
    def for_stream(cls, base_seed: int, index: int) -> "SplitMix64":
        return cls(derive_stream_state(base_seed, index))

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def below(self, bound: int) -> int:
        """Unbiased uniform draw from ``[0, bound)``."""
        zone = rejection_zone(bound)
        if zone == 0:
            return self.next_u64() & (bound - 1)
        while True:
            u = self.next_u64()
            if u < zone:
                return u % bound
