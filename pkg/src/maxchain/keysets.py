"""Deterministic generation of experiment key sets.

A KeySetSpec describes one of five families: a contiguous interval, an
arithmetic progression, a grid sumset {i*stride + j}, a uniform random
subset, or an explicit file.  The structured families are plausible
adversarial inputs for the two hash families; the harness reports which
maximizes the observed max load.

Every generator is a pure function of its spec: two runs produce
byte-identical key lists.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .rng import SplitMix64

VARIANTS = (
    "interval",
    "arithmetic-progression",
    "grid-sumset",
    "uniform-random",
    "from-file",
)


class KeyFileError(ValueError):
    """Raised for unparseable or invalid key files."""


@dataclass(frozen=True)
class KeySetSpec:
    """Declarative description of a key set inside [universe)."""

    variant: str
    universe: int
    n: int | None = None
    start: int = 0
    stride: int | None = None
    n1: int | None = None
    n2: int | None = None
    seed: int | None = None
    path: str | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown key set variant {self.variant!r}")
        if self.universe < 1:
            raise ValueError("universe must be positive")

    def size(self) -> int:
        """Number of keys the spec will generate (not known for files)."""
        if self.variant == "grid-sumset":
            assert self.n1 is not None and self.n2 is not None
            return self.n1 * self.n2
        if self.n is None:
            raise ValueError(f"{self.variant} spec does not declare a size")
        return self.n

    def to_json(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if self.variant not in ("interval", "arithmetic-progression"):
            d.pop("start", None)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "KeySetSpec":
        return cls(**d)

    def describe(self) -> str:
        d = self.to_json()
        variant = d.pop("variant")
        inner = ",".join(f"{k}={d[k]}" for k in sorted(d))
        return f"{variant}({inner})"


def generate(spec: KeySetSpec) -> list[int]:
    """Sorted, distinct keys for the spec; deterministic."""
    u = spec.universe
    if spec.variant == "interval":
        n = _require(spec.n, "n")
        _check_range(spec.start, n, 1, u)
        return list(range(spec.start, spec.start + n))

    if spec.variant == "arithmetic-progression":
        n = _require(spec.n, "n")
        stride = _require(spec.stride, "stride")
        if stride < 1:
            raise ValueError("stride must be >= 1")
        _check_range(spec.start, n, stride, u)
        return list(range(spec.start, spec.start + n * stride, stride))

    if spec.variant == "grid-sumset":
        n1 = _require(spec.n1, "n1")
        n2 = _require(spec.n2, "n2")
        stride = _require(spec.stride, "stride")
        if min(n1, n2) < 1:
            raise ValueError("grid block counts must be >= 1")
        if stride < n2:
            raise ValueError("grid-sumset requires stride >= n2 for distinctness")
        top = (n1 - 1) * stride + n2 - 1
        if top >= u:
            raise ValueError(f"largest grid key {top} >= universe {u}")
        keys = [i * stride + j for i in range(n1) for j in range(n2)]
        return keys  # already sorted: blocks are disjoint and ascending

    if spec.variant == "uniform-random":
        n = _require(spec.n, "n")
        seed = _require(spec.seed, "seed")
        if n > u:
            raise ValueError(f"cannot draw {n} distinct keys from [{u})")
        return sorted(_sample_without_replacement(n, u, seed))

    if spec.variant == "from-file":
        if spec.path is None:
            raise ValueError("from-file spec needs a path")
        keys = load_keys(spec.path)
        bad = [x for x in keys if x >= u]
        if bad:
            raise ValueError(f"key {bad[0]} >= universe {u}")
        return keys

    raise AssertionError("unreachable")


def _require(value, name: str) -> int:
    if value is None:
        raise ValueError(f"spec is missing required field {name!r}")
    return value


def _check_range(start: int, n: int, stride: int, universe: int) -> None:
    if start < 0 or n < 1:
        raise ValueError("need start >= 0 and n >= 1")
    last = start + (n - 1) * stride
    if last >= universe:
        raise ValueError(f"largest key {last} >= universe {universe}")


def _sample_without_replacement(n: int, universe: int, seed: int) -> list[int]:
    """Uniform n-subset of [universe).

    Below 50% density a rejection loop into a hash set is cheap; above it
    a partial Fisher-Yates shuffle avoids long rejection runs.  Both are
    deterministic functions of the seed.
    """
    rng = SplitMix64.for_stream(seed, 0)
    if n * 2 <= universe:
        chosen: set[int] = set()
        while len(chosen) < n:
            chosen.add(rng.below(universe))
        return list(chosen)
    pool = list(range(universe))
    for i in range(n):
        j = i + rng.below(universe - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:n]


def sweep_spec(variant: str, n: int, universe: int, seed: int) -> KeySetSpec:
    """Default adversarial-candidate spec of a given size for sweeps.

    interval: [0, n).  arithmetic-progression: stride universe//n, spread
    across the whole universe.  grid-sumset: sqrt(n) blocks of sqrt(n)
    consecutive keys, spread likewise (n must be a perfect square).
    uniform-random: seeded from the run's base seed.
    """
    if variant == "interval":
        return KeySetSpec("interval", universe, n=n)
    if variant == "arithmetic-progression":
        stride = max(1, universe // n)
        return KeySetSpec("arithmetic-progression", universe, n=n, stride=stride)
    if variant == "grid-sumset":
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"grid-sumset sweep needs square n, got {n}")
        stride = max(side, universe // side)
        return KeySetSpec("grid-sumset", universe, n1=side, n2=side, stride=stride)
    if variant == "uniform-random":
        return KeySetSpec("uniform-random", universe, n=n, seed=seed)
    raise ValueError(f"no sweep template for variant {variant!r}")


def load_keys(path: str) -> list[int]:
    """Parse a key file: one unsigned decimal per line, '#' comments."""
    keys: list[int] = []
    seen: set[int] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                value = int(line)
            except ValueError:
                raise KeyFileError(
                    f"{path}: line {lineno}: not an unsigned integer: {line!r}"
                ) from None
            if value < 0:
                raise KeyFileError(f"{path}: line {lineno}: negative key {value}")
            if value in seen:
                raise KeyFileError(f"{path}: line {lineno}: duplicate key {value}")
            seen.add(value)
            keys.append(value)
    return sorted(keys)


def save_keys(keys: Sequence[int], path: str) -> None:
    """Write keys one per line; load_keys(save_keys(k)) == sorted(k)."""
    with open(path, "w", encoding="utf-8") as fh:
        for x in keys:
            fh.write(f"{x}\n")
