import numpy as np
import pytest

from maxchain import kernels
from maxchain.hashfn import (
    ENUMERATION_GUARD_P,
    FullyRandomAssignment,
    HashFamilyId,
    LinearModPParams,
    MultiplyShiftParams,
    enumerate_linear_seeds,
    fully_random_eval,
    linear_eval,
    multiply_shift_eval,
    sample_fully_random,
    sample_linear,
    sample_multiply_shift,
)
from maxchain.rng import SplitMix64


# --- evaluation --------------------------------------------------------------


def test_linear_eval_example():
    params = LinearModPParams(p=7, m=3, a=2, b=1)
    assert linear_eval(params, 4) == 2
    assert params(4) == 2


def test_linear_eval_constant_when_a_zero():
    for b in (0, 3, 6):
        params = LinearModPParams(p=7, m=3, a=0, b=b)
        buckets = {linear_eval(params, x) for x in range(7)}
        assert len(buckets) == 1


def test_linear_eval_identity_multiplier():
    params = LinearModPParams(p=1009, m=100, a=1, b=0)
    for x in range(0, 1009, 13):
        assert linear_eval(params, x) == x % 100


def test_linear_eval_rejects_out_of_universe():
    params = LinearModPParams(p=7, m=3, a=2, b=1)
    with pytest.raises(ValueError):
        linear_eval(params, 7)


def test_linear_params_validation():
    with pytest.raises(ValueError):
        LinearModPParams(p=8, m=3, a=0, b=0)
    with pytest.raises(ValueError):
        LinearModPParams(p=7, m=8, a=0, b=0)
    with pytest.raises(ValueError):
        LinearModPParams(p=7, m=3, a=7, b=0)


def test_multiply_shift_examples():
    assert multiply_shift_eval(MultiplyShiftParams(r=4, ell=2, a=1), 13) == 3
    assert multiply_shift_eval(MultiplyShiftParams(r=4, ell=2, a=5), 3) == 3
    # zero-shift degenerate case: bucket == (a*x) mod 2**r
    params = MultiplyShiftParams(r=5, ell=5, a=7)
    for x in range(32):
        assert multiply_shift_eval(params, x) == (7 * x) % 32


def test_multiply_shift_params_validation():
    with pytest.raises(ValueError):
        MultiplyShiftParams(r=4, ell=0, a=1)
    with pytest.raises(ValueError):
        MultiplyShiftParams(r=4, ell=5, a=1)
    with pytest.raises(ValueError):
        MultiplyShiftParams(r=4, ell=2, a=2)
    with pytest.raises(ValueError):
        MultiplyShiftParams(r=4, ell=2, a=17)
    with pytest.raises(ValueError):
        MultiplyShiftParams(r=65, ell=2, a=1)


def test_shift_form_equals_floor_division_form():
    # exhaustive for r <= 8, sampled for r <= 16 (the full r = 16 grid has
    # ~3e10 cases; see the decisions notes)
    for r in range(1, 9):
        q = 1 << r
        for ell in range(1, r + 1):
            block = q // (1 << ell)
            for a in range(1, q, 2):
                params = MultiplyShiftParams(r=r, ell=ell, a=a)
                for x in range(q):
                    assert multiply_shift_eval(params, x) == ((a * x) % q) // block
    g = SplitMix64.for_stream(77, 0)
    for _ in range(10_000):
        r = 9 + g.below(8)
        q = 1 << r
        ell = 1 + g.below(r)
        a = 2 * g.below(q // 2) + 1
        x = g.below(q)
        params = MultiplyShiftParams(r=r, ell=ell, a=a)
        assert multiply_shift_eval(params, x) == ((a * x) % q) // (q // (1 << ell))


def test_outputs_stay_in_range_fuzz():
    rng = np.random.default_rng(5)
    n_cases = 1_000_000
    p = 2**31 - 1
    a = rng.integers(0, p, n_cases).astype(np.uint64)
    b = rng.integers(0, p, n_cases).astype(np.uint64)
    x = rng.integers(0, p, n_cases).astype(np.uint64)
    buckets = ((a * x + b) % np.uint64(p)) % np.uint64(977)
    assert int(buckets.max()) < 977
    # spot-check the vectorized oracle against scalar eval
    for i in range(0, n_cases, 100_000):
        params = LinearModPParams(p=p, m=977, a=int(a[i]), b=int(b[i]))
        assert linear_eval(params, int(x[i])) == int(buckets[i])
    am = (2 * rng.integers(0, 1 << 29, n_cases) + 1).astype(np.uint64)
    xm = rng.integers(0, 1 << 30, n_cases).astype(np.uint64)
    bm = ((am * xm) & np.uint64((1 << 30) - 1)) >> np.uint64(30 - 8)
    assert int(bm.max()) < 256


# --- sampling ----------------------------------------------------------------


def test_sample_linear_replay_and_kernel_identity():
    params = sample_linear(1009, 64, SplitMix64.for_stream(4, 9))
    params2 = sample_linear(1009, 64, SplitMix64.for_stream(4, 9))
    assert params == params2
    a, b = kernels.sample_linear_seeds(1009, 12, 4)
    assert (params.a, params.b) == (int(a[9]), int(b[9]))


def test_sample_linear_chi_square_p11():
    # 1e6 draws over the 121 seed cells, each within 4 sigma of uniform
    p, draws = 11, 1_000_000
    a, b = kernels.sample_linear_seeds(p, draws, 123)
    cells = np.bincount((a * np.uint64(p) + b).astype(np.int64), minlength=p * p)
    expect = draws / (p * p)
    sigma = (draws * (1 / (p * p)) * (1 - 1 / (p * p))) ** 0.5
    worst = np.abs(cells - expect).max()
    assert worst < 4 * sigma, f"worst deviation {worst:.1f} vs 4 sigma {4 * sigma:.1f}"


def test_sample_linear_p2_reaches_all_seeds():
    a, b = kernels.sample_linear_seeds(2, 4000, 5)
    seen = set(zip(a.tolist(), b.tolist()))
    assert seen == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_sample_linear_requires_m_at_most_p():
    with pytest.raises(ValueError):
        sample_linear(7, 8, SplitMix64.for_stream(0, 0))


def test_sample_multiply_shift_r2_frequencies():
    draws = 100_000
    a = kernels.sample_ms_seeds(2, draws, 9)
    ones = int((a == 1).sum())
    sigma = (draws * 0.25) ** 0.5
    assert abs(ones - draws / 2) < 4 * sigma
    assert set(np.unique(a).tolist()) == {1, 3}


def test_sample_multiply_shift_always_odd():
    a = kernels.sample_ms_seeds(30, 100_000, 11)
    assert (a % 2 == 1).all()
    params = sample_multiply_shift(30, 8, SplitMix64.for_stream(11, 17))
    assert params.a == int(a[17])


def test_sample_multiply_shift_replay():
    p1 = sample_multiply_shift(20, 5, SplitMix64.for_stream(1, 2))
    p2 = sample_multiply_shift(20, 5, SplitMix64.for_stream(1, 2))
    assert p1 == p2


# --- seed enumeration --------------------------------------------------------


def test_enumerate_linear_seeds_counts():
    seeds = list(enumerate_linear_seeds(3, 2))
    assert len(seeds) == 9
    assert seeds[0] == LinearModPParams(p=3, m=2, a=0, b=0)
    # a-major order
    assert [s.a for s in seeds] == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_enumerate_linear_seeds_contains_each_once():
    seeds = [(s.a, s.b) for s in enumerate_linear_seeds(5, 2)]
    assert len(seeds) == 25
    assert len(set(seeds)) == 25
    assert (0, 4) in seeds


def test_enumerate_linear_seeds_p251_no_duplicates():
    seeds = {(s.a, s.b) for s in enumerate_linear_seeds(251, 16)}
    assert len(seeds) == 63001


def test_enumerate_guard():
    big = 65537
    gen = enumerate_linear_seeds(big, 2)
    with pytest.raises(ValueError, match=str(big * big)):
        next(gen)
    # override works
    gen = enumerate_linear_seeds(big, 2, guard_p=big)
    assert next(gen).p == big


# --- fully random baseline ---------------------------------------------------


def test_fully_random_single_key():
    table = sample_fully_random([42], 10, SplitMix64.for_stream(0, 0))
    assert fully_random_eval(table, 42) < 10
    with pytest.raises(KeyError):
        fully_random_eval(table, 43)


def test_fully_random_replay():
    keys = list(range(100))
    t1 = sample_fully_random(keys, 10, SplitMix64.for_stream(6, 1))
    t2 = sample_fully_random(keys, 10, SplitMix64.for_stream(6, 1))
    assert t1 == t2
    with pytest.raises(ValueError):
        sample_fully_random([1, 1], 10, SplitMix64.for_stream(0, 0))


def test_fully_random_balls_in_bins_regime():
    # n = m = 10**4: the classic max-load regime, mean over 10**3 trials
    loads = kernels.random_maxloads(10_000, 10_000, 1000, 21)
    assert 3.0 <= loads.mean() <= 7.0


# --- distribution-level properties -------------------------------------------


def test_affine_invariance_of_load_multiset():
    # the multiset of max loads over all seeds is invariant under key
    # translation: full-seed histograms of X and X + c coincide
    for p, m, c in [(13, 5, 4), (61, 16, 17), (61, 61, 1)]:
        rng = np.random.default_rng(p)
        keys = np.sort(rng.choice(p, size=min(8, p - 1), replace=False)).astype(np.uint64)
        shifted = np.sort((keys + np.uint64(c)) % np.uint64(p))
        h1 = kernels.linear_exhaustive_hist(keys, p, m)
        h2 = kernels.linear_exhaustive_hist(shifted, p, m)
        assert np.array_equal(h1, h2), (p, m, c)


def test_family_id_values():
    assert HashFamilyId.LINEAR_MOD_P.value == "linear-mod-p"
    assert HashFamilyId.MULTIPLY_SHIFT.value == "multiply-shift"
    assert HashFamilyId.FULLY_RANDOM.value == "fully-random"


def test_fully_random_assignment_frozen():
    table = FullyRandomAssignment(m=4, table={1: 2})
    assert table(1) == 2
