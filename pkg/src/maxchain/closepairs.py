"""Executable verification of the close-pair counting machinery.

The max-load tail analysis rests on a counting lemma: if a set A in Z_r
has, for each multiplier b in a small coprime family B, many elements of
b*A packed into one short interval, then A itself must contain many
ordered pairs at small circular distance.  This module makes every step
of that argument executable at desk scale:

* decomposing the preimage of an interval under an invertible multiplier
  into disjoint intervals,
* counting ordered close pairs exactly,
* validating and checking randomly generated instances of the lemma,
* exact collision probabilities for both hash families against their
  analytic ceilings,
* the interval structure of hash-bucket preimages,
* exhaustive pairwise uniformity of the pre-bucket linear stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .modmath import IntervalZr, gcd, inv_mod, is_prime, mod_norm, primes_in_open_interval
from .rng import SplitMix64


# ---------------------------------------------------------------------------
# close-pair counting


def _threshold_int(bound) -> int:
    """Largest integer strictly below `bound` (a positive rational)."""
    frac = Fraction(bound)
    if frac <= 0:
        raise ValueError("bound must be positive")
    return (frac.numerator - 1) // frac.denominator


def count_close_pairs(elements: Sequence[int], modulus: int, bound) -> int:
    """Ordered pairs (x, x'), x != x', with circular norm of x - x' < bound.

    Sorted two-pointer scan, O(n log n); the count is symmetric so it is
    always even.  `bound` may be any positive rational; the comparison is
    exact.
    """
    s = sorted(elements)
    n = len(s)
    t = _threshold_int(bound)
    if len(set(s)) != n:
        raise ValueError("elements must be distinct")
    if n and not (0 <= s[0] and s[-1] < modulus):
        raise ValueError("elements must be reduced mod r")
    if n < 2:
        return 0
    if t < 1:
        return 0
    if t >= modulus // 2:
        return n * (n - 1)
    # forward-gap pairs: (s_j - s_i) mod r <= t; since 2t < r each unordered
    # close pair is counted once forward and once backward, with no overlap
    ext = s + [x + modulus for x in s]
    forward = 0
    j = 0
    for i in range(n):
        if j < i + 1:
            j = i + 1
        while j < i + n and ext[j] - s[i] <= t:
            j += 1
        forward += j - i - 1
    return 2 * forward


def count_close_pairs_naive(elements: Sequence[int], modulus: int, bound) -> int:
    """Quadratic reference count; the oracle the fast scan is tested against."""
    s = list(elements)
    frac = Fraction(bound)
    total = 0
    for x in s:
        for y in s:
            if x != y and Fraction(mod_norm((x - y) % modulus, modulus)) < frac:
                total += 1
    return total


# ---------------------------------------------------------------------------
# preimage decomposition


@dataclass(frozen=True)
class DecompositionReport:
    """The preimage of an interval under an invertible multiplier.

    b_inv_interval = union of exactly iota(b) disjoint intervals (chunks),
    each of size at most ceil(r / (n * iota(b))).  delta and tau are
    filled in by the instance check: delta[j] counts multipliers whose own
    preimage touches chunk j, tau[j] = max(0, |A intersect chunk j| - 1).
    """

    b: int
    modulus: int
    chunks: tuple[IntervalZr, ...]
    delta: tuple[int, ...] | None = None
    tau: tuple[int, ...] | None = None

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(c.length for c in self.chunks)


def decompose_preimage(b: int, interval: IntervalZr, n: int) -> DecompositionReport:
    """Split the preimage of `interval` under multiplication by b.

    Requires gcd(b, r) = 1 and |interval| = ceil(r/n) >= b; returns the b
    disjoint chunks whose union is exactly {x : b*x in interval}, each of
    size at most ceil(r/(n*b)).
    """
    r = interval.modulus
    if not 0 < b < r:
        raise ValueError("multiplier must be a canonical representative in (0, r)")
    if gcd(b, r) != 1:
        raise ValueError(f"multiplier {b} is not invertible mod {r}")
    size = interval.length
    if size != -(-r // n):
        raise ValueError(f"interval size {size} != ceil(r/n) = {-(-r // n)}")
    if size < b:
        raise ValueError(
            f"interval of size {size} cannot split into {b} non-empty chunks"
        )
    b_inv = _inverse_mod_any(b, r)
    shift = (b_inv * interval.start) % r
    chunks = []
    for k in range(b):
        u_lo = -(-(k * r) // b)  # ceil(k*r / b)
        u_hi = -(-(k * r + size) // b)
        chunks.append(IntervalZr(r, (u_lo + shift) % r, u_hi - u_lo))
    return DecompositionReport(b=b, modulus=r, chunks=tuple(chunks))


def _inverse_mod_any(a: int, r: int) -> int:
    """Inverse for gcd(a, r) = 1 with r not necessarily prime."""
    t, new_t = 0, 1
    rem, new_rem = r, a % r
    while new_rem:
        q = rem // new_rem
        t, new_t = new_t, t - q * new_t
        rem, new_rem = new_rem, rem - q * new_rem
    if rem != 1:
        raise ValueError(f"{a} is not invertible mod {r}")
    return t % r


# ---------------------------------------------------------------------------
# lemma instances


@dataclass(frozen=True)
class ClosePairInstance:
    """A planted instance of the close-pair lemma's hypotheses.

    elements: the set A in Z_r, |A| = n.
    load: the parameter M; the conclusion demands M*|B| close pairs.
    multipliers: the set B; canonical representatives in (M, 2M),
        individually and pairwise coprime and coprime to r.
    windows: per multiplier b, the interval of size ceil(r/n) that
        contains at least 4M elements of b*A.
    """

    modulus: int
    load: int
    elements: tuple[int, ...]
    multipliers: tuple[int, ...]
    windows: dict[int, IntervalZr]

    @property
    def n(self) -> int:
        return len(self.elements)

    def required_pairs(self) -> int:
        return self.load * len(self.multipliers)

    def pair_bound(self) -> Fraction:
        return Fraction(self.modulus, self.n * self.load)


@dataclass(frozen=True)
class InstanceVerdict:
    hypotheses_hold: bool
    violations: tuple[str, ...]
    pair_count: int
    required: int
    conclusion_holds: bool
    reports: tuple[DecompositionReport, ...]
    bookkeeping_ok: bool


def validate_instance(inst: ClosePairInstance) -> list[str]:
    """All hypothesis violations, empty when the instance is admissible."""
    r, M, n = inst.modulus, inst.load, inst.n
    A = inst.elements
    B = inst.multipliers
    bad: list[str] = []
    if not 4 * M <= n <= r:
        bad.append(f"need 4M <= n <= r, got M={M} n={n} r={r}")
    if len(set(A)) != n or any(not 0 <= a < r for a in A):
        bad.append("elements must be distinct residues in [r]")
    if len(set(B)) != len(B):
        bad.append("multipliers must be distinct")
    if len(B) > M:
        bad.append(f"|B| = {len(B)} exceeds M = {M}")
    for b in B:
        if not M < b < 2 * M:
            bad.append(f"multiplier {b} outside open window ({M}, {2 * M})")
        if not 0 < b < r or gcd(b, r) != 1:
            bad.append(f"multiplier {b} not coprime to r = {r}")
    for i, b in enumerate(B):
        for b2 in B[i + 1 :]:
            if gcd(b, b2) != 1:
                bad.append(f"multipliers {b} and {b2} share a factor")
    want = -(-r // n)
    a_set = set(A)
    for b in B:
        win = inst.windows.get(b)
        if win is None or win.modulus != r:
            bad.append(f"multiplier {b} lacks a window in Z_{r}")
            continue
        if win.length != want:
            bad.append(f"window for {b} has size {win.length} != ceil(r/n) = {want}")
            continue
        if gcd(b, r) != 1:
            continue  # already reported above
        b_inv = _inverse_mod_any(b, r)
        hits = sum(1 for y in win.iter_members() if (b_inv * y) % r in a_set)
        if hits < 4 * M:
            bad.append(f"window for {b} holds {hits} < 4M = {4 * M} mapped elements")
    return bad


def check_instance(inst: ClosePairInstance) -> InstanceVerdict:
    """Validate hypotheses, count close pairs, and audit the bookkeeping.

    conclusion_holds means the close-pair count reaches M*|B|; the suite
    asserts it whenever hypotheses_hold.
    """
    violations = tuple(validate_instance(inst))
    pair_count = count_close_pairs(inst.elements, inst.modulus, inst.pair_bound())
    required = inst.required_pairs()

    reports = []
    bookkeeping_ok = True
    if not violations:
        r = inst.modulus
        a_set = set(inst.elements)
        decomps = {
            b: decompose_preimage(b, inst.windows[b], inst.n) for b in inst.multipliers
        }
        preimage_members = {
            b: set().union(*(set(c.members()) for c in d.chunks))
            for b, d in decomps.items()
        }
        for b in inst.multipliers:
            rep = decomps[b]
            delta = []
            tau = []
            for chunk in rep.chunks:
                members = set(chunk.members())
                touching = sum(
                    1 for b2 in inst.multipliers if members & preimage_members[b2]
                )
                delta.append(touching)
                tau.append(max(0, len(members & a_set) - 1))
            rep = replace(rep, delta=tuple(delta), tau=tuple(tau))
            reports.append(rep)
            iota = b
            if any(d < 1 for d in delta):
                bookkeeping_ok = False
            if not sum(delta) < len(inst.multipliers) + iota:
                bookkeeping_ok = False
            if not sum(tau) >= 4 * inst.load - iota:
                bookkeeping_ok = False

    return InstanceVerdict(
        hypotheses_hold=not violations,
        violations=violations,
        pair_count=pair_count,
        required=required,
        conclusion_holds=pair_count >= required,
        reports=tuple(reports),
        bookkeeping_ok=bookkeeping_ok,
    )


def generate_instance(r: int, n: int, M: int, rng: SplitMix64) -> ClosePairInstance | None:
    """Construct a random admissible instance, or None when infeasible.

    B is drawn from the primes in the open window (M, 2M) that do not
    divide r (distinct primes are automatically pairwise coprime).  For
    each chosen b a random window is planted with 4M mapped elements; the
    set is then padded with random residues up to size n.
    """
    if not 4 * M <= n <= r:
        raise ValueError("need 4M <= n <= r")
    size = -(-r // n)
    if size < 4 * M:
        return None  # window too short to ever hold 4M elements
    candidates = [q for q in primes_in_open_interval(M, 2 * M) if r % q != 0]
    if not candidates:
        return None
    b_cap = min(M, n // (4 * M), len(candidates))
    if b_cap < 1:
        return None
    b_count = 1 + rng.below(b_cap)
    pool = list(candidates)
    for i in range(b_count):
        j = i + rng.below(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    multipliers = tuple(sorted(pool[:b_count]))

    elements: set[int] = set()
    windows: dict[int, IntervalZr] = {}
    for b in multipliers:
        start = rng.below(r)
        win = IntervalZr(r, start, size)
        windows[b] = win
        offsets = list(range(size))
        for i in range(4 * M):
            j = i + rng.below(size - i)
            offsets[i], offsets[j] = offsets[j], offsets[i]
        b_inv = _inverse_mod_any(b, r)
        for off in offsets[: 4 * M]:
            y = (start + off) % r
            elements.add((b_inv * y) % r)
    while len(elements) < n:
        elements.add(rng.below(r))

    inst = ClosePairInstance(
        modulus=r,
        load=M,
        elements=tuple(sorted(elements)),
        multipliers=multipliers,
        windows=windows,
    )
    if validate_instance(inst):
        return None  # planting produced an inadmissible instance
    return inst


@dataclass(frozen=True)
class CampaignResult:
    instances_checked: int
    infeasible_draws: int
    failures: tuple[dict, ...]

    @property
    def all_hold(self) -> bool:
        return not self.failures


def run_campaign(
    instances: int,
    base_seed: int,
    *,
    r_max: int = 10_000,
    load_min: int = 2,
    load_max: int = 8,
    max_draws: int | None = None,
) -> CampaignResult:
    """Generate and check admissible instances until `instances` pass
    through the checker; collects any conclusion or bookkeeping failure."""
    checked = 0
    infeasible = 0
    draws = 0
    failures: list[dict] = []
    cap = max_draws if max_draws is not None else instances * 50
    while checked < instances and draws < cap:
        g = SplitMix64.for_stream(base_seed, draws)
        draws += 1
        M = load_min + g.below(load_max - load_min + 1)
        r_floor = 4 * M * (4 * M - 1) + 1
        if r_floor > r_max:
            infeasible += 1
            continue
        r = r_floor + g.below(r_max - r_floor + 1)
        n_max = (r - 1) // (4 * M - 1)
        n = 4 * M + g.below(max(1, n_max - 4 * M + 1))
        inst = generate_instance(r, n, M, g)
        if inst is None:
            infeasible += 1
            continue
        verdict = check_instance(inst)
        checked += 1
        if not (verdict.hypotheses_hold and verdict.conclusion_holds and verdict.bookkeeping_ok):
            failures.append(counterexample_record(inst, verdict))
    return CampaignResult(
        instances_checked=checked,
        infeasible_draws=infeasible,
        failures=tuple(failures),
    )


def counterexample_record(inst: ClosePairInstance, verdict: InstanceVerdict) -> dict:
    return {
        "r": inst.modulus,
        "n": inst.n,
        "M": inst.load,
        "A": list(inst.elements),
        "B": list(inst.multipliers),
        "intervals": {str(b): [w.start, w.length] for b, w in inst.windows.items()},
        "pair_count": verdict.pair_count,
        "required": verdict.required,
        "violations": list(verdict.violations),
        "bookkeeping_ok": verdict.bookkeeping_ok,
    }


def dump_counterexample(record: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# exact collision probabilities


def exact_collision_probability_linear(p: int, m: int, alpha, d: int) -> Fraction:
    """Exact Pr over a in Z_p^* that the norm of a*d mod p is < p/(m*alpha).

    The analytic ceiling for this probability is 2p/(m*alpha*(p-1)).
    """
    if d % p == 0:
        raise ValueError("difference d must be nonzero mod p")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    alpha_f = Fraction(alpha)
    if alpha_f < 1:
        raise ValueError("alpha must be >= 1")
    bound = Fraction(p, m) / alpha_f
    t = _threshold_int(bound)
    d %= p
    if t < 1:
        return Fraction(0)  # a*d is never 0 mod p, and nonzero norms are >= 1
    count = 0
    for a in range(1, p):
        if mod_norm(a * d % p, p) <= t:
            count += 1
    return Fraction(count, p - 1)


def exact_collision_probability_ms(r_bits: int, ell: int, alpha, d: int) -> Fraction:
    """Exact Pr over odd a in [2**r] that norm(a*d mod q) < q/(m*alpha).

    The analytic ceiling is 4/(m*alpha) with m = 2**ell.
    """
    q = 1 << r_bits
    m = 1 << ell
    if d % q == 0:
        raise ValueError("difference d must be nonzero mod q")
    alpha_f = Fraction(alpha)
    if alpha_f < 1:
        raise ValueError("alpha must be >= 1")
    bound = Fraction(q, m) / alpha_f
    t = _threshold_int(bound)
    d %= q
    if t < 1:
        return Fraction(0)  # a odd is invertible, so a*d is never 0 mod q
    count = 0
    for a in range(1, q, 2):
        if mod_norm(a * d % q, q) <= t:
            count += 1
    return Fraction(count, q // 2)


def collision_ceiling_linear(p: int, m: int, alpha) -> Fraction:
    return Fraction(2 * p, m * (p - 1)) / Fraction(alpha)


def collision_ceiling_ms(ell: int, alpha) -> Fraction:
    return Fraction(4, 1 << ell) / Fraction(alpha)


# ---------------------------------------------------------------------------
# bucket preimage geometry


def interval_preimage_of_bucket_linear(p: int, m: int, y: int) -> IntervalZr:
    """The bucket preimage {x : (x mod m) == y} scaled by m^-1, in Z_p.

    The scaled set is a genuine interval of size ceil((p - y)/m), which is
    at most ceil(p/m).  In the degenerate p == m case the preimage is the
    single residue y and is returned unscaled as a size-1 interval.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if not 1 <= m <= p:
        raise ValueError("need 1 <= m <= p")
    if not 0 <= y < m:
        raise ValueError("bucket index out of range")
    if p == m:
        return IntervalZr(p, y, 1)
    size = -(-(p - y) // m)
    start = inv_mod(m, p) * y % p
    interval = IntervalZr(p, start, size)
    # construction certificate: every member maps back into bucket y
    for x in interval.iter_members():
        if (m * x % p) % m != y:
            raise AssertionError("preimage interval certification failed")
    return interval


def interval_preimage_of_bucket_ms(r_bits: int, ell: int, y: int) -> IntervalZr:
    """The aligned block of size q/m that a*X must cross to land in bucket y."""
    if not 1 <= ell <= r_bits <= 64:
        raise ValueError("need 1 <= ell <= r <= 64")
    q = 1 << r_bits
    width = 1 << (r_bits - ell)
    if not 0 <= y < (1 << ell):
        raise ValueError("bucket index out of range")
    return IntervalZr(q, y * width, width)


# ---------------------------------------------------------------------------
# pairwise uniformity of the pre-bucket stage


def pairwise_uniformity_exhaustive(p: int, key_pairs: Iterable[tuple[int, int]]) -> bool:
    """Check that (a, b) -> (a*x+b mod p, a*x'+b mod p) is a bijection.

    Exhausts the whole seed space per key pair; p is capped because the
    work is p**2 per pair.
    """
    if p > 101:
        raise ValueError("exhaustive pairwise check is capped at p <= 101")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    b_arr = np.arange(p, dtype=np.int64)
    for x, x2 in key_pairs:
        if x == x2:
            raise ValueError("key pair must be distinct")
        if not (0 <= x < p and 0 <= x2 < p):
            raise ValueError("keys must lie in [p]")
        seen = np.zeros(p * p, dtype=np.int64)
        for a in range(p):
            v1 = (a * x + b_arr) % p
            v2 = (a * x2 + b_arr) % p
            np.add.at(seen, v1 * p + v2, 1)
        if not (seen == 1).all():
            return False
    return True


def sample_distinct_pairs(p: int, count: int, rng: SplitMix64) -> list[tuple[int, int]]:
    pairs = []
    for _ in range(count):
        x = rng.below(p)
        x2 = rng.below(p)
        while x2 == x:
            x2 = rng.below(p)
        pairs.append((x, x2))
    return pairs
