"""Exact integer and modular arithmetic.

Everything here is pure and deterministic: 64-bit-safe modular products,
gcd, modular inverse, exact primality, prime enumeration, the canonical
representative of a residue class, the circular norm on Z_r, and intervals
in Z_r with wraparound.

Moduli are capped at 2**63 - 1 so that complements like ``r - x`` and all
interval arithmetic stay inside unsigned 64-bit range; only the product in
:func:`mul_mod` needs a wider intermediate, and Python integers provide it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

MAX_MODULUS = (1 << 63) - 1

# Deterministic Miller-Rabin witnesses: this fixed set decides primality
# exactly for every n < 3,317,044,064,679,887,385,961,981 (Sorenson &
# Webster), which covers all 64-bit inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _check_modulus(r: int) -> None:
    if r < 2:
        raise ValueError(f"modulus must be >= 2, got {r}")
    if r > MAX_MODULUS:
        raise ValueError(f"modulus {r} exceeds cap 2**63 - 1")


def mul_mod(x: int, y: int, r: int) -> int:
    """(x * y) mod r, exact for any r < 2**63.

    Python integers are unbounded, so the double-width product is exact by
    construction; the numba kernels reimplement this with a split method
    and are tested against it.
    """
    _check_modulus(r)
    if not (0 <= x < r and 0 <= y < r):
        raise ValueError("operands must be reduced mod r")
    return (x * y) % r


def gcd(n: int, m: int) -> int:
    """Greatest common divisor; rejects (0, 0)."""
    if n == 0 and m == 0:
        raise ValueError("gcd(0, 0) is undefined")
    n, m = abs(n), abs(m)
    while m:
        n, m = m, n % m
    return n


def inv_mod(a: int, p: int) -> int:
    """Multiplicative inverse of a mod prime p; a must be nonzero mod p."""
    a %= p
    if a == 0:
        raise ValueError("0 has no inverse")
    # extended Euclid; p prime guarantees gcd(a, p) = 1
    b, x0, x1 = p, 0, 1
    aa = a
    while aa > 1:
        q = aa // b
        aa, b = b, aa - q * b
        x1, x0 = x0, x1 - q * x0
    return x1 % p


def is_prime(n: int) -> bool:
    """Exact primality for 64-bit n (deterministic Miller-Rabin)."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n == w:
            return True
        if n % w == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_at_least(m: int) -> "Prime64":
    """Smallest prime >= m."""
    if m < 2:
        raise ValueError("m must be >= 2")
    n = m
    while True:
        if n > MAX_MODULUS:
            raise OverflowError("no prime found below the 2**63 - 1 cap")
        if is_prime(n):
            return Prime64(n)
        n += 1


def primes_in_open_interval(lo: int, hi: int) -> list[int]:
    """All primes q with lo < q < hi (both ends strict), ascending."""
    if not (0 <= lo < hi):
        raise ValueError("need 0 <= lo < hi")
    return [q for q in range(lo + 1, hi) if is_prime(q)]


def mod_norm(x: int, r: int) -> int:
    """Circular distance of x to 0 in Z_r: min(x, r - x), and 0 at x = 0."""
    _check_modulus(r)
    if not 0 <= x < r:
        raise ValueError("x must be reduced mod r")
    return min(x, r - x) if x else 0


class Prime64(int):
    """An int that is checked to be prime on construction."""

    def __new__(cls, p: int) -> "Prime64":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return super().__new__(cls, p)


@dataclass(frozen=True)
class Residue:
    """A residue class mod r, stored as its canonical representative in [r]."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} not reduced mod {self.modulus}")

    @classmethod
    def of(cls, x: int, r: int) -> "Residue":
        _check_modulus(r)
        return cls(x % r, r)

    def _compat(self, other: "Residue") -> None:
        if self.modulus != other.modulus:
            raise ValueError("mixed moduli")

    def __add__(self, other: "Residue") -> "Residue":
        self._compat(other)
        return Residue((self.value + other.value) % self.modulus, self.modulus)

    def __sub__(self, other: "Residue") -> "Residue":
        self._compat(other)
        return Residue((self.value - other.value) % self.modulus, self.modulus)

    def __mul__(self, other: "Residue") -> "Residue":
        self._compat(other)
        return Residue(mul_mod(self.value, other.value, self.modulus), self.modulus)

    def inverse(self) -> "Residue":
        if gcd(self.value, self.modulus) != 1:
            raise ValueError(f"{self.value} not invertible mod {self.modulus}")
        # general-modulus inverse via extended Euclid
        b, x0, x1 = self.modulus, 0, 1
        a = self.value
        while a > 1:
            q = a // b
            a, b = b, a - q * b
            x1, x0 = x0, x1 - q * x0
        return Residue(x1 % self.modulus, self.modulus)

    def norm(self) -> int:
        return mod_norm(self.value, self.modulus)


@dataclass(frozen=True)
class IntervalZr:
    """An interval of consecutive residues in Z_r, with wraparound.

    ``x in I`` iff (x - start) mod r < length.  length ranges over [1, r];
    length = r is the whole of Z_r.
    """

    modulus: int
    start: int
    length: int

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        if not 0 <= self.start < self.modulus:
            raise ValueError("start must be reduced mod r")
        if not 1 <= self.length <= self.modulus:
            raise ValueError(f"length must be in [1, {self.modulus}]")

    def __contains__(self, x: int) -> bool:
        return (x - self.start) % self.modulus < self.length

    def __len__(self) -> int:
        return self.length

    def members(self) -> list[int]:
        """The elements start, start+1, ... taken mod r, in that order."""
        r = self.modulus
        return [(self.start + k) % r for k in range(self.length)]

    def iter_members(self) -> Iterator[int]:
        r = self.modulus
        s = self.start
        for k in range(self.length):
            yield (s + k) % r


def interval_members(interval: IntervalZr) -> list[int]:
    """List form of an interval; order follows the wraparound walk."""
    return interval.members()
