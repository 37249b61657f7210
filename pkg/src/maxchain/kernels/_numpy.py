"""Pure-numpy fallback for the hot loops.

Bit-compatible with `maxchain.kernels._numba`: identical RNG streams and
identical integer outputs, just vectorized across trials instead of
compiled.  Selected via ``MAXCHAIN_BACKEND=numpy`` or automatically when
numba is unavailable.
"""

from __future__ import annotations

import numpy as np

from ..rng import GOLDEN, MASK64, mix64

MAX_COUNTS_M = 1 << 22

_DIRECT_P = 1 << 31

_GOLD = np.uint64(GOLDEN)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

# elements per vectorized block; bounds peak memory
_BLOCK_ELEMS = 1 << 22


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _stream_states(base_seed: int, start_index: int, count: int) -> np.ndarray:
    idx = np.arange(start_index, start_index + count, dtype=np.uint64)
    mb = np.uint64(mix64(base_seed))
    return _mix64_vec(mb ^ _mix64_vec(idx + np.uint64(1)))


def _draw_below_vec(states: np.ndarray, bound: int) -> np.ndarray:
    """One draw per stream; advances ``states`` in place."""
    if bound & (bound - 1) == 0:
        states += _GOLD
        return _mix64_vec(states) & np.uint64(bound - 1)
    zone = np.uint64((1 << 64) - ((1 << 64) % bound))
    b = np.uint64(bound)
    out = np.empty(states.shape, dtype=np.uint64)
    pending = np.arange(states.shape[0])
    while pending.size:
        states[pending] += _GOLD
        u = _mix64_vec(states[pending])
        ok = u < zone
        hit = pending[ok]
        out[hit] = u[ok] % b
        pending = pending[~ok]
    return out


def _rowwise_maxload(buckets: np.ndarray, m: int) -> np.ndarray:
    """Max bucket multiplicity per row of a (rows, n) bucket matrix."""
    rows = buckets.shape[0]
    if m <= MAX_COUNTS_M:
        off = np.arange(rows, dtype=np.int64)[:, None] * np.int64(m)
        flat = (buckets.astype(np.int64) + off).ravel()
        counts = np.bincount(flat, minlength=rows * m)
        return counts.reshape(rows, m).max(axis=1)
    out = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        out[i] = np.unique(buckets[i], return_counts=True)[1].max()
    return out


def _block_rows(n: int, m: int) -> int:
    per_row = max(n, m if m <= MAX_COUNTS_M else 0, 1)
    return max(1, _BLOCK_ELEMS // per_row)


def sample_linear_seeds(p, count, base_seed, start_index=0):
    states = _stream_states(base_seed, start_index, count)
    a = _draw_below_vec(states, p)
    b = _draw_below_vec(states, p)
    return a, b


def sample_ms_seeds(r_bits, count, base_seed, start_index=0):
    states = _stream_states(base_seed, start_index, count)
    u = _draw_below_vec(states, 1 << (r_bits - 1))
    return (u << np.uint64(1)) | np.uint64(1)


def linear_maxloads(keys, p, m, a_arr, b_arr):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    a_arr = np.ascontiguousarray(a_arr, dtype=np.uint64)
    b_arr = np.ascontiguousarray(b_arr, dtype=np.uint64)
    n = keys.shape[0]
    t_count = a_arr.shape[0]
    out = np.empty(t_count, dtype=np.int64)
    p_u = np.uint64(p)
    m_u = np.uint64(m)
    if p < _DIRECT_P:
        rows = _block_rows(n, m)
        for lo in range(0, t_count, rows):
            hi = min(lo + rows, t_count)
            v = a_arr[lo:hi, None] * keys[None, :] + b_arr[lo:hi, None]
            buckets = (v % p_u) % m_u
            out[lo:hi] = _rowwise_maxload(buckets, m)
    else:
        # exact object-integer path: slow, used only for p >= 2**31
        keys_obj = keys.astype(object)
        for t in range(t_count):
            v = (int(a_arr[t]) * keys_obj + int(b_arr[t])) % p % m
            buckets = v.astype(np.uint64)[None, :]
            out[t] = _rowwise_maxload(buckets, m)[0]
    return out


def ms_maxloads(keys, r_bits, ell, a_arr):
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    a_arr = np.ascontiguousarray(a_arr, dtype=np.uint64)
    mask = np.uint64((1 << r_bits) - 1 if r_bits < 64 else 0xFFFFFFFFFFFFFFFF)
    shift = np.uint64(r_bits - ell)
    n = keys.shape[0]
    m = 1 << ell
    t_count = a_arr.shape[0]
    out = np.empty(t_count, dtype=np.int64)
    rows = _block_rows(n, m)
    for lo in range(0, t_count, rows):
        hi = min(lo + rows, t_count)
        prod = a_arr[lo:hi, None] * keys[None, :]
        buckets = (prod & mask) >> shift
        out[lo:hi] = _rowwise_maxload(buckets, m)
    return out


def random_maxloads(n, m, count, base_seed, start_index=0):
    out = np.empty(count, dtype=np.int64)
    rows = _block_rows(n, m)
    for lo in range(0, count, rows):
        hi = min(lo + rows, count)
        states = _stream_states(base_seed, start_index + lo, hi - lo)
        buckets = np.empty((hi - lo, n), dtype=np.uint64)
        for j in range(n):
            buckets[:, j] = _draw_below_vec(states, m)
        out[lo:hi] = _rowwise_maxload(buckets, m)
    return out


def linear_exhaustive_hist(keys, p, m, a_start=0, a_end=None):
    if a_end is None:
        a_end = p
    if p >= _DIRECT_P:
        raise ValueError("exhaustive enumeration is not supported for p >= 2**31")
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    n = keys.shape[0]
    hist = np.zeros(n + 1, dtype=np.int64)
    p_u = np.uint64(p)
    m_u = np.uint64(m)
    rows = _block_rows(n, m)
    b_all = np.arange(p, dtype=np.uint64)
    for a in range(a_start, a_end):
        v = (np.uint64(a) * keys) % p_u
        for lo in range(0, p, rows):
            hi = min(lo + rows, p)
            t = v[None, :] + b_all[lo:hi, None]
            t = np.where(t >= p_u, t - p_u, t)
            loads = _rowwise_maxload(t % m_u, m)
            hist += np.bincount(loads, minlength=n + 1)
    return hist
