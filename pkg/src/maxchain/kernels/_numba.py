"""Hot loops compiled with numba.

Mirrors `maxchain.kernels._numpy` exactly: same RNG streams, same integer
results.  All hash/RNG state is unsigned 64-bit; constants are pre-cast so
no operation silently promotes to float.  Kernels release the GIL so the
experiment layer can run chunks on real threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)

# counts-array load counting is used when m is at most this; larger tables
# fall back to sort-and-scan so memory stays O(n)
MAX_COUNTS_M = 1 << 22

# direct 64-bit products are exact below this (a*x < 2**62)
_DIRECT_P = 1 << 31

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _mix64(z):
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(**_JIT)
def _stream_state(base_seed, index):
    return _mix64(_mix64(base_seed) ^ _mix64(index + U1))


@njit(**_JIT)
def _draw_below(state, bound, zone):
    """One unbiased draw from [0, bound); zone == 0 flags a power of two.

    Returns (new_state, value).
    """
    if zone == U0:
        state = state + GOLDEN
        return state, _mix64(state) & (bound - U1)
    while True:
        state = state + GOLDEN
        u = _mix64(state)
        if u < zone:
            return state, u % bound


@njit(**_JIT)
def _mulmod_wide(x, y, r):
    """(x*y) mod r by shift-and-add; exact for any r < 2**63."""
    acc = U0
    while y != U0:
        if y & U1:
            acc = acc + x
            if acc >= r:
                acc = acc - r
        x = x << U1
        if x >= r:
            x = x - r
        y = y >> U1
    return acc


@njit(**_JIT)
def _maxload_counts(buckets, counts):
    best = 0
    for i in range(buckets.shape[0]):
        y = buckets[i]
        c = counts[y] + 1
        counts[y] = c
        if c > best:
            best = c
    for i in range(buckets.shape[0]):
        counts[buckets[i]] = 0
    return best


@njit(**_JIT)
def _maxload_sorted(buckets):
    s = np.sort(buckets)
    best = 1
    run = 1
    for i in range(1, s.shape[0]):
        if s[i] == s[i - 1]:
            run += 1
            if run > best:
                best = run
        else:
            run = 1
    return best


@njit(**_JIT)
def _sample_linear_seeds(p, zone, count, base_seed, start_index):
    a_out = np.empty(count, dtype=np.uint64)
    b_out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        state = _stream_state(base_seed, start_index + np.uint64(i))
        state, a = _draw_below(state, p, zone)
        state, b = _draw_below(state, p, zone)
        a_out[i] = a
        b_out[i] = b
    return a_out, b_out


@njit(**_JIT)
def _sample_ms_seeds(half, zone, count, base_seed, start_index):
    a_out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        state = _stream_state(base_seed, start_index + np.uint64(i))
        state, u = _draw_below(state, half, zone)
        a_out[i] = (u << U1) | U1
    return a_out


@njit(**_JIT)
def _linear_maxloads(keys, p, m, a_arr, b_arr, counts_len):
    t_count = a_arr.shape[0]
    n = keys.shape[0]
    out = np.empty(t_count, dtype=np.int64)
    buckets = np.empty(n, dtype=np.uint64)
    counts = np.zeros(max(counts_len, 1), dtype=np.int64)
    direct = p < np.uint64(_DIRECT_P)
    for t in range(t_count):
        a = a_arr[t]
        b = b_arr[t]
        for i in range(n):
            if direct:
                v = (a * keys[i] + b) % p
            else:
                v = _mulmod_wide(a, keys[i], p) + b
                if v >= p:
                    v = v - p
            buckets[i] = v % m
        if counts_len > 0:
            out[t] = _maxload_counts(buckets, counts)
        else:
            out[t] = _maxload_sorted(buckets)
    return out


@njit(**_JIT)
def _ms_maxloads(keys, mask, shift, a_arr, counts_len):
    t_count = a_arr.shape[0]
    n = keys.shape[0]
    out = np.empty(t_count, dtype=np.int64)
    buckets = np.empty(n, dtype=np.uint64)
    counts = np.zeros(max(counts_len, 1), dtype=np.int64)
    for t in range(t_count):
        a = a_arr[t]
        for i in range(n):
            buckets[i] = ((a * keys[i]) & mask) >> shift
        if counts_len > 0:
            out[t] = _maxload_counts(buckets, counts)
        else:
            out[t] = _maxload_sorted(buckets)
    return out


@njit(**_JIT)
def _random_maxloads(n, m, zone, count, base_seed, start_index, counts_len):
    out = np.empty(count, dtype=np.int64)
    buckets = np.empty(n, dtype=np.uint64)
    counts = np.zeros(max(counts_len, 1), dtype=np.int64)
    for t in range(count):
        state = _stream_state(base_seed, start_index + np.uint64(t))
        for i in range(n):
            state, y = _draw_below(state, m, zone)
            buckets[i] = y
        if counts_len > 0:
            out[t] = _maxload_counts(buckets, counts)
        else:
            out[t] = _maxload_sorted(buckets)
    return out


@njit(**_JIT)
def _linear_exhaustive_hist(keys, p, m, a_start, a_end):
    n = keys.shape[0]
    hist = np.zeros(n + 1, dtype=np.int64)
    v = np.empty(n, dtype=np.uint64)
    counts = np.zeros(np.int64(m), dtype=np.int64)
    direct = p < np.uint64(_DIRECT_P)
    p_i = np.int64(p)
    for a_i in range(a_start, a_end):
        a = np.uint64(a_i)
        for i in range(n):
            if direct:
                v[i] = (a * keys[i]) % p
            else:
                v[i] = _mulmod_wide(a, keys[i], p)
        for b_i in range(p_i):
            b = np.uint64(b_i)
            best = 0
            for i in range(n):
                t = v[i] + b
                if t >= p:
                    t = t - p
                y = t % m
                c = counts[y] + 1
                counts[y] = c
                if c > best:
                    best = c
            hist[best] += 1
            for i in range(n):
                t = v[i] + b
                if t >= p:
                    t = t - p
                counts[t % m] = 0
    return hist


def _zone(bound: int) -> int:
    return 0 if bound & (bound - 1) == 0 else (1 << 64) - ((1 << 64) % bound)


def sample_linear_seeds(p, count, base_seed, start_index=0):
    return _sample_linear_seeds(
        np.uint64(p), np.uint64(_zone(p)), count, np.uint64(base_seed), np.uint64(start_index)
    )


def sample_ms_seeds(r_bits, count, base_seed, start_index=0):
    half = 1 << (r_bits - 1)
    return _sample_ms_seeds(
        np.uint64(half), np.uint64(0), count, np.uint64(base_seed), np.uint64(start_index)
    )


def linear_maxloads(keys, p, m, a_arr, b_arr):
    counts_len = m if m <= MAX_COUNTS_M else 0
    return _linear_maxloads(
        np.ascontiguousarray(keys, dtype=np.uint64),
        np.uint64(p),
        np.uint64(m),
        np.ascontiguousarray(a_arr, dtype=np.uint64),
        np.ascontiguousarray(b_arr, dtype=np.uint64),
        counts_len,
    )


def ms_maxloads(keys, r_bits, ell, a_arr):
    mask = np.uint64((1 << r_bits) - 1 if r_bits < 64 else 0xFFFFFFFFFFFFFFFF)
    m = 1 << ell
    counts_len = m if m <= MAX_COUNTS_M else 0
    return _ms_maxloads(
        np.ascontiguousarray(keys, dtype=np.uint64),
        mask,
        np.uint64(r_bits - ell),
        np.ascontiguousarray(a_arr, dtype=np.uint64),
        counts_len,
    )


def random_maxloads(n, m, count, base_seed, start_index=0):
    counts_len = m if m <= MAX_COUNTS_M else 0
    return _random_maxloads(
        n,
        np.uint64(m),
        np.uint64(_zone(m)),
        count,
        np.uint64(base_seed),
        np.uint64(start_index),
        counts_len,
    )


def linear_exhaustive_hist(keys, p, m, a_start=0, a_end=None):
    if a_end is None:
        a_end = p
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    return _linear_exhaustive_hist(
        keys, np.uint64(p), np.uint64(m), np.int64(a_start), np.int64(a_end)
    )
