"""Measurement harness for the max-load statistic.

Monte Carlo trial batches, the exact all-seeds oracle for small p, tail
estimates with Wilson intervals, scaling sweeps with a log-log exponent
fit, and close-pair counting experiments.

Determinism contract: trial i of a batch draws from the stream derived
from (base_seed, i) and from nothing else, so any chunking of the trial
range over any number of threads reproduces the same batch bit for bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats as _scipy_stats

from . import kernels
from .hashfn import HashFamilyId
from .keysets import KeySetSpec, generate, sweep_spec
from .modmath import is_prime, mod_norm, next_prime_at_least
from .rng import SplitMix64, mix64

EXHAUSTIVE_GUARD_P = 1 << 16

# 95% two-sided normal quantile, used by the Wilson interval
_Z95 = 1.959963984540054

_THREADS_ENV = "MAXCHAIN_THREADS"


def default_threads() -> int:
    raw = os.environ.get(_THREADS_ENV, "").strip()
    if raw:
        return max(1, int(raw))
    return 1


# ---------------------------------------------------------------------------
# family configurations (a family = distribution over hash seeds)


@dataclass(frozen=True)
class LinearFamily:
    p: int
    m: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if not 1 <= self.m <= self.p:
            raise ValueError("need 1 <= m <= p")

    id = HashFamilyId.LINEAR_MOD_P

    @property
    def universe(self) -> int:
        return self.p

    def to_json(self) -> dict:
        return {"family": self.id.value, "p": self.p, "m": self.m}


@dataclass(frozen=True)
class MultiplyShiftFamily:
    r: int
    ell: int

    def __post_init__(self) -> None:
        if not 1 <= self.ell <= self.r <= 64:
            raise ValueError("need 1 <= ell <= r <= 64")

    id = HashFamilyId.MULTIPLY_SHIFT

    @property
    def m(self) -> int:
        return 1 << self.ell

    @property
    def universe(self) -> int:
        return 1 << self.r

    def to_json(self) -> dict:
        return {"family": self.id.value, "r": self.r, "ell": self.ell}


@dataclass(frozen=True)
class FullyRandomFamily:
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("need m >= 1")

    id = HashFamilyId.FULLY_RANDOM

    @property
    def universe(self) -> int | None:
        return None

    def to_json(self) -> dict:
        return {"family": self.id.value, "m": self.m}


Family = LinearFamily | MultiplyShiftFamily | FullyRandomFamily


def family_from_json(d: dict) -> Family:
    tag = d["family"]
    if tag == HashFamilyId.LINEAR_MOD_P.value:
        return LinearFamily(p=d["p"], m=d["m"])
    if tag == HashFamilyId.MULTIPLY_SHIFT.value:
        return MultiplyShiftFamily(r=d["r"], ell=d["ell"])
    if tag == HashFamilyId.FULLY_RANDOM.value:
        return FullyRandomFamily(m=d["m"])
    raise ValueError(f"unknown family tag {tag!r}")


# ---------------------------------------------------------------------------
# confidence intervals


def t_interval(values: np.ndarray, confidence: float = 0.95) -> tuple[float, float, float]:
    """(mean, lo, hi) using a Student t interval; width 0 when degenerate."""
    n = len(values)
    mean = float(values.mean()) if n else math.nan
    if n < 2:
        return mean, mean, mean
    sd = float(values.std(ddof=1))
    if sd == 0.0:
        return mean, mean, mean
    tq = float(_scipy_stats.t.ppf(0.5 + confidence / 2, n - 1))
    half = tq * sd / math.sqrt(n)
    return mean, mean - half, mean + half


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; valid near 0 and 1."""
    if total <= 0:
        raise ValueError("total must be positive")
    p_hat = successes / total
    denom = 1 + z * z / total
    center = (p_hat + z * z / (2 * total)) / denom
    spread = z * math.sqrt(p_hat * (1 - p_hat) / total + z * z / (4 * total * total)) / denom
    # the extreme-side endpoints are exactly 0 and 1; don't let sqrt roundoff
    # pull them inward
    lo = 0.0 if successes == 0 else max(0.0, center - spread)
    hi = 1.0 if successes == total else min(1.0, center + spread)
    return lo, hi


# ---------------------------------------------------------------------------
# Monte Carlo trial batches


@dataclass(frozen=True)
class TrialBatch:
    """Per-trial max loads for one (family, key set) configuration."""

    family: Family
    keyspec: KeySetSpec | None
    n: int
    trials: int
    base_seed: int
    max_loads: np.ndarray
    seeds_a: np.ndarray | None
    seeds_b: np.ndarray | None

    def mean_ci(self) -> tuple[float, float, float]:
        return t_interval(self.max_loads)


def _chunk_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _run_chunks(worker, total: int, threads: int):
    ranges = _chunk_ranges(total, threads)
    if len(ranges) == 1 or threads <= 1:
        return [worker(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(worker, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futs]


def _resolve_keys(family: Family, keys_or_spec) -> tuple[KeySetSpec | None, np.ndarray]:
    if isinstance(keys_or_spec, KeySetSpec):
        spec = keys_or_spec
        keys = generate(spec)
    else:
        spec = None
        keys = sorted(int(x) for x in keys_or_spec)
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate keys")
        if keys and keys[0] < 0:
            raise ValueError("negative key")
    if not keys:
        raise ValueError("empty key set")
    universe = family.universe
    if universe is not None and keys[-1] >= universe:
        raise ValueError(
            f"key {keys[-1]} outside the family universe [{universe}) (incompatible universe)"
        )
    return spec, np.asarray(keys, dtype=np.uint64)


def run_trials(
    family: Family,
    keys_or_spec,
    trials: int,
    base_seed: int,
    *,
    threads: int | None = None,
    force_a: int | None = None,
    force_b: int | None = None,
) -> TrialBatch:
    """Sample `trials` hash seeds and record the max load of each.

    force_a / force_b are diagnostic overrides for the linear family: the
    seed component is replaced after sampling (stream consumption is
    unchanged), e.g. force_a=0 exhibits the constant-hash degeneracy.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    threads = default_threads() if threads is None else max(1, threads)
    spec, keys = _resolve_keys(family, keys_or_spec)
    n = len(keys)

    if isinstance(family, LinearFamily):

        def worker(lo: int, hi: int):
            a, b = kernels.sample_linear_seeds(family.p, hi - lo, base_seed, lo)
            if force_a is not None:
                a = np.full_like(a, force_a)
            if force_b is not None:
                b = np.full_like(b, force_b)
            loads = kernels.linear_maxloads(keys, family.p, family.m, a, b)
            return a, b, loads

        parts = _run_chunks(worker, trials, threads)
        a_all = np.concatenate([p[0] for p in parts])
        b_all = np.concatenate([p[1] for p in parts])
        m_all = np.concatenate([p[2] for p in parts])
        return TrialBatch(family, spec, n, trials, base_seed, m_all, a_all, b_all)

    if isinstance(family, MultiplyShiftFamily):
        if force_a is not None or force_b is not None:
            raise ValueError("seed overrides are a linear-family diagnostic")

        def worker(lo: int, hi: int):
            a = kernels.sample_ms_seeds(family.r, hi - lo, base_seed, lo)
            loads = kernels.ms_maxloads(keys, family.r, family.ell, a)
            return a, loads

        parts = _run_chunks(worker, trials, threads)
        a_all = np.concatenate([p[0] for p in parts])
        m_all = np.concatenate([p[1] for p in parts])
        return TrialBatch(family, spec, n, trials, base_seed, m_all, a_all, None)

    if force_a is not None or force_b is not None:
        raise ValueError("seed overrides are a linear-family diagnostic")

    def worker(lo: int, hi: int):
        return kernels.random_maxloads(n, family.m, hi - lo, base_seed, lo)

    parts = _run_chunks(worker, trials, threads)
    m_all = np.concatenate(parts)
    return TrialBatch(family, spec, n, trials, base_seed, m_all, None, None)


# ---------------------------------------------------------------------------
# exact all-seeds oracle


@dataclass(frozen=True)
class ExhaustiveResult:
    """Exact distribution of the max load over all p**2 linear seeds."""

    p: int
    m: int
    n: int
    hist: np.ndarray  # hist[v] = number of seeds with max load v

    @property
    def seed_count(self) -> int:
        return self.p * self.p

    def mean_exact(self) -> Fraction:
        total = sum(v * int(c) for v, c in enumerate(self.hist))
        return Fraction(total, self.seed_count)

    def mean_float(self) -> float:
        return float(self.mean_exact())

    def tail_exact(self, threshold: int) -> Fraction:
        """Exact Pr[M >= threshold] over the full seed space."""
        if threshold <= 1:
            return Fraction(1)
        if threshold >= len(self.hist):
            return Fraction(0)
        return Fraction(int(self.hist[threshold:].sum()), self.seed_count)

    def tail_exact_nonzero_a(self, threshold: int) -> Fraction:
        """Exact Pr[M >= threshold | a != 0].

        The a = 0 seeds are constant hashes, so all p of them sit exactly
        at M = n; conditioning is a closed-form adjustment.  The cubic
        tail decay holds for this conditional law; unconditionally the
        a = 0 atom keeps the deep tail at 1/p.
        """
        if threshold <= 1:
            return Fraction(1)
        if threshold >= len(self.hist):
            return Fraction(0)
        count = int(self.hist[threshold:].sum()) - self.p  # drop the a=0 atom at M=n
        return Fraction(count, self.seed_count - self.p)


def exhaustive_expectation(
    p: int,
    m: int,
    keys: Sequence[int],
    *,
    guard_p: int = EXHAUSTIVE_GUARD_P,
    threads: int | None = None,
) -> ExhaustiveResult:
    """Average the max load over every seed (a, b) in [p]**2, exactly."""
    if p > guard_p:
        raise ValueError(
            f"exhaustive enumeration over p**2 = {p * p} seeds exceeds the guard "
            f"(p <= {guard_p}); pass guard_p to override"
        )
    family = LinearFamily(p=p, m=m)
    _, keys_arr = _resolve_keys(family, keys)
    threads = default_threads() if threads is None else max(1, threads)

    def worker(lo: int, hi: int):
        return kernels.linear_exhaustive_hist(keys_arr, p, m, lo, hi)

    parts = _run_chunks(worker, p, threads)
    hist = np.sum(parts, axis=0)
    return ExhaustiveResult(p=p, m=m, n=len(keys_arr), hist=hist)


# ---------------------------------------------------------------------------
# tail estimation


@dataclass(frozen=True)
class TailEstimate:
    alpha: float
    threshold: int
    p_hat: float
    ci_low: float
    ci_high: float
    exceed_count: int
    trials: int


def tail_threshold(alpha) -> int:
    """The integer threshold ceil(4*alpha) for a real alpha >= 1."""
    frac = Fraction(alpha).limit_denominator(1 << 32) if isinstance(alpha, float) else Fraction(alpha)
    if frac < 1:
        raise ValueError("alpha must be >= 1")
    return int(math.ceil(frac * 4))


def estimate_tail(batch: TrialBatch, alpha) -> TailEstimate:
    """Empirical Pr[max load >= ceil(4*alpha)] with a Wilson 95% interval.

    Thresholds above n are allowed and give an exact zero estimate.
    """
    threshold = tail_threshold(alpha)
    hits = int((batch.max_loads >= threshold).sum())
    lo, hi = wilson_interval(hits, batch.trials)
    return TailEstimate(
        alpha=float(alpha),
        threshold=threshold,
        p_hat=hits / batch.trials,
        ci_low=lo,
        ci_high=hi,
        exceed_count=hits,
        trials=batch.trials,
    )


# ---------------------------------------------------------------------------
# scaling sweeps


@dataclass(frozen=True)
class ScalingRow:
    n: int
    m: int
    trials: int
    row_seed: int
    mean: float
    ci_low: float
    ci_high: float
    normalized: float  # mean / (n ln n)^(1/3)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    family_kind: str
    keyset_variant: str
    universe_exponent: int
    base_seed: int
    rows: tuple[ScalingRow, ...]
    fit: ScalingFit


def fit_loglog(ns: Sequence[int], means: Sequence[float]) -> ScalingFit:
    """Ordinary least squares of ln(mean) against ln(n)."""
    if len(ns) < 3:
        raise ValueError("need at least 3 points for a meaningful fit")
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(means, dtype=np.float64))
    xm = x.mean()
    ym = y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    intercept = float(ym - slope * xm)
    resid = tuple(float(v) for v in (y - slope * x - intercept))
    return ScalingFit(slope=slope, intercept=intercept, residuals=resid)


def _row_seed(base_seed: int, n: int) -> int:
    return mix64(base_seed ^ mix64(n))


def scaling_sweep(
    family_kind: str,
    keyset_variant: str,
    n_grid: Sequence[int],
    trials: int,
    base_seed: int,
    *,
    universe_exponent: int = 30,
    threads: int | None = None,
) -> SweepResult:
    """Measure mean max load across an ascending n grid with m = n.

    The m = n regime is the hardest case the chained-table application
    cares about.  Rows use the derived seed mix(base_seed, n) so any row
    can be reproduced in isolation.
    """
    if list(n_grid) != sorted(set(n_grid)):
        raise ValueError("n grid must be strictly ascending")
    if len(n_grid) < 3:
        raise ValueError("n grid must have at least 3 points")
    universe = 1 << universe_exponent
    if family_kind == HashFamilyId.LINEAR_MOD_P.value:
        p = int(next_prime_at_least(universe))
    rows = []
    for n in n_grid:
        if n > universe:
            raise ValueError(f"n = {n} exceeds universe 2**{universe_exponent}")
        seed = _row_seed(base_seed, n)
        if family_kind == HashFamilyId.LINEAR_MOD_P.value:
            family: Family = LinearFamily(p=p, m=n)
            key_universe = universe
        elif family_kind == HashFamilyId.MULTIPLY_SHIFT.value:
            ell = n.bit_length() - 1
            if 1 << ell != n:
                raise ValueError("multiply-shift sweeps need power-of-two n")
            family = MultiplyShiftFamily(r=universe_exponent, ell=ell)
            key_universe = universe
        elif family_kind == HashFamilyId.FULLY_RANDOM.value:
            family = FullyRandomFamily(m=n)
            key_universe = universe
        else:
            raise ValueError(f"unknown family kind {family_kind!r}")
        spec = sweep_spec(keyset_variant, n, key_universe, seed)
        batch = run_trials(family, spec, trials, seed, threads=threads)
        mean, lo, hi = batch.mean_ci()
        rows.append(
            ScalingRow(
                n=n,
                m=family.m,
                trials=trials,
                row_seed=seed,
                mean=mean,
                ci_low=lo,
                ci_high=hi,
                normalized=mean / (n * math.log(n)) ** (1.0 / 3.0),
            )
        )
    fit = fit_loglog([r.n for r in rows], [r.mean for r in rows])
    return SweepResult(
        family_kind=family_kind,
        keyset_variant=keyset_variant,
        universe_exponent=universe_exponent,
        base_seed=base_seed,
        rows=tuple(rows),
        fit=fit,
    )


# ---------------------------------------------------------------------------
# close-pair counting experiments


@dataclass(frozen=True)
class ClosePairResult:
    """Observed mean count of ordered close pairs after multiplier scaling.

    A close pair is an ordered pair x != x' with circular norm of
    a*(x - x') below universe/(m*alpha).  `ceiling` is the analytic bound
    on the expectation: 2*n*(n-1)*p/(m*alpha*(p-1)) for the linear family
    and 4*n*(n-1)/(m*alpha) for multiply-shift.
    """

    alpha: float
    trials: int
    mean: float
    ci_low: float
    ci_high: float
    ceiling: float


def _close_pair_count_mapped(keys: Sequence[int], a: int, universe: int, bound: Fraction) -> int:
    from .closepairs import count_close_pairs

    mapped = [(a * x) % universe for x in keys]
    return count_close_pairs(mapped, universe, bound)


def close_pair_bound(family: Family, alpha: Fraction) -> Fraction:
    if isinstance(family, LinearFamily):
        return Fraction(family.p, family.m) / alpha
    if isinstance(family, MultiplyShiftFamily):
        return Fraction(family.universe, family.m) / alpha
    raise ValueError("close pairs are defined for the two algebraic families")


def close_pair_ceiling(family: Family, n: int, alpha: Fraction) -> Fraction:
    if isinstance(family, LinearFamily):
        return Fraction(2 * n * (n - 1) * family.p, family.m * (family.p - 1)) / alpha
    if isinstance(family, MultiplyShiftFamily):
        return Fraction(4 * n * (n - 1), family.m) / alpha
    raise ValueError("close pairs are defined for the two algebraic families")


def close_pair_expectation(
    family: Family,
    keys_or_spec,
    alpha,
    trials: int,
    base_seed: int,
) -> ClosePairResult:
    """Monte Carlo mean of the close-pair count over random multipliers.

    Linear multipliers are drawn from the nonzero residues, matching the
    distribution the analytic ceiling is stated for.
    """
    alpha_f = Fraction(alpha).limit_denominator(1 << 32) if isinstance(alpha, float) else Fraction(alpha)
    if alpha_f < 1:
        raise ValueError("alpha must be >= 1")
    _, keys_arr = _resolve_keys(family, keys_or_spec)
    keys = [int(x) for x in keys_arr]
    n = len(keys)
    universe = family.universe
    if universe is None:
        raise ValueError("close pairs are defined for the two algebraic families")
    bound = close_pair_bound(family, alpha_f)
    counts = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        g = SplitMix64.for_stream(base_seed, i)
        if isinstance(family, LinearFamily):
            a = 1 + g.below(family.p - 1)
        else:
            a = 2 * g.below(universe // 2) + 1
        counts[i] = _close_pair_count_mapped(keys, a, universe, bound)
    mean, lo, hi = t_interval(counts)
    return ClosePairResult(
        alpha=float(alpha_f),
        trials=trials,
        mean=mean,
        ci_low=lo,
        ci_high=hi,
        ceiling=float(close_pair_ceiling(family, n, alpha_f)),
    )


def exact_close_pair_mean(family: Family, keys: Sequence[int], alpha) -> Fraction:
    """Exact mean close-pair count over every admissible multiplier.

    Enumerates all of Z_p^* (linear) or all odd residues (multiply-shift);
    feasible at desk scale only.
    """
    alpha_f = Fraction(alpha)
    universe = family.universe
    if universe is None:
        raise ValueError("close pairs are defined for the two algebraic families")
    bound = close_pair_bound(family, alpha_f)
    keys = sorted(int(x) for x in keys)
    if isinstance(family, LinearFamily):
        multipliers = range(1, family.p)
    else:
        multipliers = range(1, universe, 2)
    total = 0
    count = 0
    for a in multipliers:
        total += _close_pair_count_mapped(keys, a, universe, bound)
        count += 1
    return Fraction(total, count)
