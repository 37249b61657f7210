"""Max-load analysis of linear mod-p and multiply-shift hashing.

Implements the two hash families, hashing-with-chaining instrumentation,
Monte Carlo and exhaustive-seed measurement of the longest chain, and
executable desk-scale verification of the combinatorial bounds behind the
max-load tail analysis.
"""

__version__ = "0.1.0"

from .chaintable import ChainedTable, LoadProfile, build_profile, max_load
from .experiment import (
    FullyRandomFamily,
    LinearFamily,
    MultiplyShiftFamily,
    TrialBatch,
    estimate_tail,
    exhaustive_expectation,
    run_trials,
    scaling_sweep,
)
from .hashfn import (
    HashFamilyId,
    LinearModPParams,
    MultiplyShiftParams,
    linear_eval,
    multiply_shift_eval,
    sample_linear,
    sample_multiply_shift,
)
from .keysets import KeySetSpec, generate, load_keys, save_keys
from .modmath import IntervalZr, Prime64, Residue, is_prime, mod_norm, next_prime_at_least
from .rng import SplitMix64

__all__ = [
    "ChainedTable",
    "FullyRandomFamily",
    "HashFamilyId",
    "IntervalZr",
    "KeySetSpec",
    "LinearFamily",
    "LinearModPParams",
    "LoadProfile",
    "MultiplyShiftFamily",
    "MultiplyShiftParams",
    "Prime64",
    "Residue",
    "SplitMix64",
    "TrialBatch",
    "build_profile",
    "estimate_tail",
    "exhaustive_expectation",
    "generate",
    "is_prime",
    "linear_eval",
    "load_keys",
    "max_load",
    "mod_norm",
    "multiply_shift_eval",
    "next_prime_at_least",
    "run_trials",
    "sample_linear",
    "sample_multiply_shift",
    "save_keys",
    "scaling_sweep",
]
