"""The two hash families under study, plus a fully-random baseline.

Linear mod-p:      h(x) = ((a*x + b) mod p) mod m,  a, b uniform over [p].
Multiply-shift:    h(x) = ((a*x) mod 2**r) >> (r - ell),  a uniform odd.
Fully random:      a fresh i.i.d. uniform bucket per key (baseline only;
                   nothing is proved about it, it anchors the plots).

Scalar evaluation here is exact Python arithmetic; the batch kernels in
`maxchain.kernels` implement the same functions over arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .modmath import is_prime
from .rng import SplitMix64

# enumerate_linear_seeds refuses p above this unless explicitly overridden;
# the full seed space has p**2 elements
ENUMERATION_GUARD_P = 1 << 16


class HashFamilyId(str, enum.Enum):
    LINEAR_MOD_P = "linear-mod-p"
    MULTIPLY_SHIFT = "multiply-shift"
    FULLY_RANDOM = "fully-random"


@dataclass(frozen=True)
class LinearModPParams:
    """One sampled seed (a, b) of the linear family over [p] -> [m]."""

    p: int
    m: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if not 1 <= self.m <= self.p:
            raise ValueError("need 1 <= m <= p")
        if not (0 <= self.a < self.p and 0 <= self.b < self.p):
            raise ValueError("seed (a, b) must be reduced mod p")

    def __call__(self, x: int) -> int:
        return linear_eval(self, x)


@dataclass(frozen=True)
class MultiplyShiftParams:
    """One sampled odd multiplier of the multiply-shift family.

    Keys live in [2**r]; buckets are the top ell bits of the low r bits of
    a*x, i.e. [2**ell].
    """

    r: int
    ell: int
    a: int

    def __post_init__(self) -> None:
        if not 1 <= self.ell <= self.r <= 64:
            raise ValueError("need 1 <= ell <= r <= 64")
        if self.a % 2 == 0:
            raise ValueError("multiplier must be odd")
        if not 0 < self.a < (1 << self.r):
            raise ValueError("multiplier must lie in [2**r]")

    @property
    def q(self) -> int:
        return 1 << self.r

    @property
    def m(self) -> int:
        return 1 << self.ell

    def __call__(self, x: int) -> int:
        return multiply_shift_eval(self, x)


@dataclass(frozen=True)
class FullyRandomAssignment:
    """A frozen key -> bucket table with i.i.d. uniform buckets."""

    m: int
    table: dict[int, int] = field(hash=False)

    def __call__(self, x: int) -> int:
        return fully_random_eval(self, x)


def linear_eval(params: LinearModPParams, x: int) -> int:
    """((a*x + b) mod p) mod m; exact for any operand size."""
    if not 0 <= x < params.p:
        raise ValueError(f"key {x} outside universe [{params.p}]")
    return ((params.a * x + params.b) % params.p) % params.m


def multiply_shift_eval(params: MultiplyShiftParams, x: int) -> int:
    """((a*x) mod 2**r) >> (r - ell).

    Identical to floor(((a*x) mod q) / (q/m)); the shift form is the one
    computed, the equivalence is pinned by tests.
    """
    if not 0 <= x < params.q:
        raise ValueError(f"key {x} outside universe [2**{params.r}]")
    return ((params.a * x) & (params.q - 1)) >> (params.r - params.ell)


def fully_random_eval(assignment: FullyRandomAssignment, x: int) -> int:
    try:
        return assignment.table[x]
    except KeyError:
        raise KeyError(f"key {x} has no assigned bucket") from None


def sample_linear(p: int, m: int, rng: SplitMix64) -> LinearModPParams:
    """Draw a and b independently and uniformly from [p]; a = 0 included."""
    if m > p:
        raise ValueError("need p >= m")
    a = rng.below(p)
    b = rng.below(p)
    return LinearModPParams(p=p, m=m, a=a, b=b)


def sample_multiply_shift(r: int, ell: int, rng: SplitMix64) -> MultiplyShiftParams:
    """Draw a = 2u + 1 with u uniform over [2**(r-1)]."""
    if not 1 <= ell <= r <= 64:
        raise ValueError("need 1 <= ell <= r <= 64")
    u = rng.below(1 << (r - 1))
    return MultiplyShiftParams(r=r, ell=ell, a=2 * u + 1)


def sample_fully_random(keys: Sequence[int], m: int, rng: SplitMix64) -> FullyRandomAssignment:
    """Assign each key an i.i.d. uniform bucket; keys are consumed in the
    order given, so a sorted key list makes the draw order canonical."""
    table = {}
    for x in keys:
        if x in table:
            raise ValueError(f"duplicate key {x}")
        table[x] = rng.below(m)
    return FullyRandomAssignment(m=m, table=table)


def enumerate_linear_seeds(
    p: int, m: int, *, guard_p: int = ENUMERATION_GUARD_P
) -> Iterator[LinearModPParams]:
    """All p**2 seeds (a, b), a-major, each exactly once."""
    if p > guard_p:
        raise ValueError(
            f"enumerating p**2 = {p * p} seeds exceeds the guard (p <= {guard_p}); "
            "pass guard_p to override"
        )
    for a in range(p):
        for b in range(p):
            yield LinearModPParams(p=p, m=m, a=a, b=b)
