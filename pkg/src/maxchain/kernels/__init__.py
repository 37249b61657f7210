"""Backend dispatch for the hot kernels.

Two interchangeable implementations exist: numba-compiled loops
(`_numba`) and a vectorized pure-numpy fallback (`_numpy`).  Both produce
bit-identical integer results; `maxchain.bench` compares their speed.

Selection order:

1. ``MAXCHAIN_BACKEND=numpy`` forces the fallback.
2. ``MAXCHAIN_BACKEND=numba`` requires numba (import error surfaces).
3. Unset: numba if it imports, else the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

_ENV_VAR = "MAXCHAIN_BACKEND"

_BACKEND_NAME: str
_IMPL: ModuleType


def _load(name: str) -> ModuleType:
    if name == "numpy":
        from . import _numpy as impl
    elif name == "numba":
        from . import _numba as impl
    else:
        raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")
    return impl


_requested = os.environ.get(_ENV_VAR, "").strip().lower()
if _requested:
    _IMPL = _load(_requested)
    _BACKEND_NAME = _requested
else:
    try:
        _IMPL = _load("numba")
        _BACKEND_NAME = "numba"
    except ImportError:
        _IMPL = _load("numpy")
        _BACKEND_NAME = "numpy"


def backend_name() -> str:
    """Name of the active kernel backend."""
    return _BACKEND_NAME


def get_backend(name: str) -> ModuleType:
    """Load a specific backend module (for tests and benchmarks)."""
    return _load(name)


sample_linear_seeds = _IMPL.sample_linear_seeds
sample_ms_seeds = _IMPL.sample_ms_seeds
linear_maxloads = _IMPL.linear_maxloads
ms_maxloads = _IMPL.ms_maxloads
random_maxloads = _IMPL.random_maxloads
linear_exhaustive_hist = _IMPL.linear_exhaustive_hist
