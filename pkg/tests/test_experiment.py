import math
from fractions import Fraction

import numpy as np
import pytest

from maxchain.experiment import (
    FullyRandomFamily,
    LinearFamily,
    MultiplyShiftFamily,
    close_pair_ceiling,
    close_pair_expectation,
    estimate_tail,
    exact_close_pair_mean,
    exhaustive_expectation,
    family_from_json,
    fit_loglog,
    run_trials,
    scaling_sweep,
    t_interval,
    tail_threshold,
    wilson_interval,
)
from maxchain.keysets import KeySetSpec


# --- families ----------------------------------------------------------------


def test_family_json_round_trip():
    for fam in (LinearFamily(p=13, m=4), MultiplyShiftFamily(r=10, ell=3), FullyRandomFamily(m=9)):
        assert family_from_json(fam.to_json()) == fam
    with pytest.raises(ValueError):
        family_from_json({"family": "folded-tabulation"})
    with pytest.raises(ValueError):
        LinearFamily(p=12, m=4)
    with pytest.raises(ValueError):
        MultiplyShiftFamily(r=3, ell=4)


# --- run_trials --------------------------------------------------------------


def test_single_key_always_load_one():
    for family in (
        LinearFamily(p=13, m=4),
        MultiplyShiftFamily(r=8, ell=2),
        FullyRandomFamily(m=4),
    ):
        batch = run_trials(family, [5], 50, base_seed=1)
        assert (batch.max_loads == 1).all()
        mean, lo, hi = batch.mean_ci()
        assert mean == 1.0 and lo == hi == 1.0


def test_forced_zero_multiplier_gives_full_load():
    spec = KeySetSpec("interval", 251, n=16)
    batch = run_trials(LinearFamily(p=251, m=16), spec, 200, 3, force_a=0)
    assert (batch.max_loads == 16).all()
    assert (batch.seeds_a == 0).all()


def test_force_rejected_for_other_families():
    with pytest.raises(ValueError):
        run_trials(MultiplyShiftFamily(r=8, ell=2), [1, 2], 5, 0, force_a=0)
    with pytest.raises(ValueError):
        run_trials(FullyRandomFamily(m=4), [1, 2], 5, 0, force_b=0)


def test_thread_count_is_invisible():
    spec = KeySetSpec("uniform-random", 1009, n=40, seed=8)
    batches = [
        run_trials(LinearFamily(p=1009, m=64), spec, 997, 5, threads=k) for k in (1, 3, 8)
    ]
    for other in batches[1:]:
        assert np.array_equal(batches[0].max_loads, other.max_loads)
        assert np.array_equal(batches[0].seeds_a, other.seeds_a)
        assert np.array_equal(batches[0].seeds_b, other.seeds_b)


def test_universe_compatibility_enforced():
    with pytest.raises(ValueError, match="universe"):
        run_trials(LinearFamily(p=13, m=4), [13], 5, 0)
    with pytest.raises(ValueError, match="universe"):
        run_trials(MultiplyShiftFamily(r=4, ell=2), [16], 5, 0)
    with pytest.raises(ValueError, match="duplicate"):
        run_trials(LinearFamily(p=13, m=4), [1, 1], 5, 0)
    with pytest.raises(ValueError):
        run_trials(LinearFamily(p=13, m=4), [1], 0, 0)


# --- exhaustive oracle -------------------------------------------------------


def test_exhaustive_p3_hand_enumeration():
    res = exhaustive_expectation(3, 3, [0, 1, 2])
    assert res.mean_exact() == Fraction(5, 3)
    assert res.hist.tolist() == [0, 6, 0, 3]
    assert res.tail_exact(1) == 1
    assert res.tail_exact(2) == Fraction(3, 9)
    assert res.tail_exact(4) == 0


def test_exhaustive_single_key():
    res = exhaustive_expectation(7, 3, [4])
    assert res.mean_exact() == 1


def test_exhaustive_against_naive_reimplementation():
    p, m = 251, 16
    keys = list(range(16))
    res = exhaustive_expectation(p, m, keys)
    total = 0
    hist = [0] * 17
    for a in range(p):
        vals = [a * x % p for x in keys]
        for b in range(p):
            counts = [0] * m
            for v in vals:
                counts[(v + b) % p % m] += 1
            load = max(counts)
            total += load
            hist[load] += 1
    assert res.mean_exact() == Fraction(total, p * p)
    assert res.hist.tolist() == hist


def test_exhaustive_guard():
    with pytest.raises(ValueError, match="guard"):
        exhaustive_expectation(65537, 2, [0, 1])


def test_exhaustive_tail_conditional_on_nonzero_a():
    res = exhaustive_expectation(31, 4, list(range(8)))
    # the a = 0 atom sits at M = n and is removed exactly
    assert res.tail_exact(8) >= Fraction(31, 31 * 31)
    uncond = res.tail_exact(8)
    cond = res.tail_exact_nonzero_a(8)
    assert cond == (uncond * 31 * 31 - 31) / (31 * 31 - 31)
    assert res.tail_exact_nonzero_a(1) == 1
    assert res.tail_exact_nonzero_a(9) == 0


def test_monte_carlo_agrees_with_exhaustive():
    p, m, n = 61, 8, 8
    spec = KeySetSpec("uniform-random", p, n=n, seed=12)
    from maxchain.keysets import generate

    keys = generate(spec)
    exact = exhaustive_expectation(p, m, keys)
    batch = run_trials(LinearFamily(p=p, m=m), spec, 20_000, 14)
    mean = float(batch.max_loads.mean())
    se = float(batch.max_loads.std(ddof=1)) / math.sqrt(batch.trials)
    assert abs(mean - exact.mean_float()) <= 3 * se
    # empirical tail covers the exact tail at each threshold
    for t in range(1, n + 1):
        hits = int((batch.max_loads >= t).sum())
        lo, hi = wilson_interval(hits, batch.trials)
        assert lo <= float(exact.tail_exact(t)) <= hi, t


def test_tail_monotone_within_batch():
    spec = KeySetSpec("interval", 251, n=16)
    batch = run_trials(LinearFamily(p=251, m=16), spec, 5000, 2)
    last = 1.1
    for t in range(1, 17):
        p_hat = float((batch.max_loads >= t).mean())
        assert p_hat <= last
        last = p_hat


def test_tail_constant_does_not_grow_with_alpha():
    # alpha**3 * Pr[M >= 4*alpha | a != 0] / (n ln n) across the alpha grid,
    # on a fixed exhaustively-enumerated instance
    from maxchain.keysets import generate

    p, m, n = 251, 16, 16
    keys = generate(KeySetSpec("uniform-random", p, n=n, seed=2024))
    res = exhaustive_expectation(p, m, keys)
    consts = [
        float(Fraction(alpha**3) * res.tail_exact_nonzero_a(4 * alpha)) / (n * math.log(n))
        for alpha in (1, 2, 4, 8)
    ]
    assert all(consts[i + 1] <= consts[i] for i in range(len(consts) - 1)), consts


# --- tail estimation ---------------------------------------------------------


def test_tail_threshold_rounds_up():
    assert tail_threshold(1) == 4
    assert tail_threshold(1.25) == 5
    assert tail_threshold(Fraction(9, 8)) == 5
    with pytest.raises(ValueError):
        tail_threshold(0.5)


def test_estimate_tail_beyond_n_is_zero():
    batch = run_trials(LinearFamily(p=31, m=8), [0, 1, 2, 3], 500, 1)
    est = estimate_tail(batch, alpha=2)  # threshold 8 > n = 4
    assert est.p_hat == 0.0
    assert est.ci_low == 0.0
    assert 0 < est.ci_high < 0.02


def test_estimate_tail_bounds_are_ordered():
    spec = KeySetSpec("interval", 251, n=16)
    batch = run_trials(LinearFamily(p=251, m=16), spec, 2000, 7)
    for alpha in (1, 1.5, 2, 4):
        est = estimate_tail(batch, alpha)
        assert 0 <= est.ci_low <= est.p_hat <= est.ci_high <= 1
        assert est.threshold == tail_threshold(alpha)


def test_wilson_interval_reference_values():
    # hand-checked against the closed form
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0
    assert 0.036 < hi < 0.038
    lo, hi = wilson_interval(50, 100)
    assert 0.40 < lo < 0.41 and 0.59 < hi < 0.60
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_t_interval_degenerate_cases():
    mean, lo, hi = t_interval(np.array([5.0]))
    assert mean == lo == hi == 5.0
    mean, lo, hi = t_interval(np.array([2.0, 2.0, 2.0]))
    assert mean == lo == hi == 2.0
    mean, lo, hi = t_interval(np.array([1.0, 2.0, 3.0, 4.0]))
    assert lo < mean == 2.5 < hi


# --- scaling sweeps ----------------------------------------------------------


def test_fit_loglog_flat_and_power_law():
    flat = fit_loglog([16, 64, 256], [3.0, 3.0, 3.0])
    assert abs(flat.slope) < 1e-12
    power = fit_loglog([2**8, 2**10, 2**12], [2.0**4, 2.0**5, 2.0**6])
    assert abs(power.slope - 0.5) < 1e-9
    assert max(abs(r) for r in power.residuals) < 1e-9
    with pytest.raises(ValueError):
        fit_loglog([16, 64], [1.0, 2.0])


def test_fit_requires_ascending_grid():
    with pytest.raises(ValueError):
        scaling_sweep("linear-mod-p", "interval", [64, 16, 256], 10, 0)


def test_scaling_sweep_small_linear():
    res = scaling_sweep(
        "linear-mod-p", "interval", [16, 64, 256], 50, 3, universe_exponent=16
    )
    assert [row.n for row in res.rows] == [16, 64, 256]
    for row in res.rows:
        assert 1 <= row.mean <= row.n
        assert row.m == row.n
        assert row.normalized > 0
        assert row.ci_low <= row.mean <= row.ci_high
    res2 = scaling_sweep(
        "linear-mod-p", "interval", [16, 64, 256], 50, 3, universe_exponent=16, threads=4
    )
    assert res == res2  # thread count invisible


def test_scaling_sweep_ms_and_random():
    res = scaling_sweep(
        "multiply-shift", "uniform-random", [16, 64, 256], 30, 5, universe_exponent=16
    )
    assert all(r.mean >= 1 for r in res.rows)
    with pytest.raises(ValueError, match="power-of-two"):
        scaling_sweep("multiply-shift", "interval", [16, 60, 256], 10, 0)
    res = scaling_sweep(
        "fully-random", "uniform-random", [16, 64, 256], 30, 5, universe_exponent=16
    )
    assert all(1 <= r.mean <= r.n for r in res.rows)


# --- close pairs -------------------------------------------------------------


def test_close_pairs_single_key_is_zero():
    res = close_pair_expectation(LinearFamily(p=101, m=8), [5], alpha=1, trials=50, base_seed=0)
    assert res.mean == 0.0


def test_exact_close_pair_mean_under_ceiling_linear():
    keys = [0, 3, 11, 42, 57, 77, 90, 100]
    fam = LinearFamily(p=101, m=8)
    for alpha in (1, 2, 4):
        exact = exact_close_pair_mean(fam, keys, alpha)
        assert exact <= close_pair_ceiling(fam, len(keys), Fraction(alpha))


def test_exact_close_pair_mean_under_ceiling_ms():
    keys = [1, 5, 100, 255, 256, 700, 900, 1023]
    fam = MultiplyShiftFamily(r=10, ell=3)
    for alpha in (1, 2, 4):
        exact = exact_close_pair_mean(fam, keys, alpha)
        assert exact <= close_pair_ceiling(fam, len(keys), Fraction(alpha))


def test_close_pair_monte_carlo_brackets_exact():
    keys = [0, 3, 11, 42, 57, 77, 90, 100]
    fam = LinearFamily(p=101, m=8)
    exact = float(exact_close_pair_mean(fam, keys, 2))
    res = close_pair_expectation(fam, keys, alpha=2, trials=4000, base_seed=6)
    assert res.ci_low <= exact <= res.ci_high
    assert res.ceiling == pytest.approx(float(close_pair_ceiling(fam, 8, Fraction(2))))


def test_close_pair_rejects_bad_family_and_alpha():
    with pytest.raises(ValueError):
        close_pair_expectation(FullyRandomFamily(m=8), [1, 2], 1, 10, 0)
    with pytest.raises(ValueError):
        close_pair_expectation(LinearFamily(p=101, m=8), [1, 2], 0.5, 10, 0)
