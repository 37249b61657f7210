"""CSV and JSON output schemas.

Every output embeds the full run configuration so it can be reproduced
byte for byte; floats are serialized with Python's shortest round-trip
representation, which parses back to the identical double.

CSV files deliberately omit the thread count from their metadata: results
are independent of threading by the seeding contract, and the files must
be byte-identical across thread counts.  JSON files carry the thread
count under config for provenance; `verify` compares only `results`.
"""

from __future__ import annotations

import json
import sys
from typing import IO, Iterable

from . import __version__
from .chaintable import LoadProfile
from .experiment import SweepResult, TrialBatch

TOOL_NAME = "maxchain"


def json_envelope(command: str, config: dict, results: dict) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config": config,
        "results": results,
    }


def dump_json(obj: dict, fh: IO[str]) -> None:
    json.dump(obj, fh, indent=2, sort_keys=True)
    fh.write("\n")


def write_json(obj: dict, path: str | None) -> None:
    if path is None or path == "-":
        dump_json(obj, sys.stdout)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            dump_json(obj, fh)


def _csv_header(fh: IO[str], config: dict) -> None:
    fh.write(f"# {TOOL_NAME} {__version__}\n")
    cfg = {k: v for k, v in config.items() if k != "threads"}
    fh.write(f"# config: {json.dumps(cfg, sort_keys=True)}\n")


def write_trials_csv(batch: TrialBatch, config: dict, path: str) -> None:
    """One row per trial: trial_index, a, b, M (a/b blank when the family
    has no such seed component)."""
    with open(path, "w", encoding="utf-8") as fh:
        _csv_header(fh, config)
        fh.write("trial_index,a,b,M\n")
        a = batch.seeds_a
        b = batch.seeds_b
        for i, load in enumerate(batch.max_loads):
            a_s = str(int(a[i])) if a is not None else ""
            b_s = str(int(b[i])) if b is not None else ""
            fh.write(f"{i},{a_s},{b_s},{int(load)}\n")


def write_scaling_csv(sweeps: Iterable[SweepResult], config: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _csv_header(fh, config)
        fh.write("family,keyset,n,m,trials,row_seed,mean,ci_low,ci_high,normalized\n")
        for sweep in sweeps:
            for row in sweep.rows:
                fh.write(
                    f"{sweep.family_kind},{sweep.keyset_variant},{row.n},{row.m},"
                    f"{row.trials},{row.row_seed},{row.mean!r},{row.ci_low!r},"
                    f"{row.ci_high!r},{row.normalized!r}\n"
                )


def write_profile_csv(profile: LoadProfile, config: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _csv_header(fh, config)
        fh.write("bucket_index,count\n")
        for y, count in enumerate(profile.counts):
            fh.write(f"{y},{count}\n")


def batch_summary(batch: TrialBatch) -> dict:
    mean, lo, hi = batch.mean_ci()
    return {
        "n": batch.n,
        "trials": batch.trials,
        "mean": mean,
        "ci_low": lo,
        "ci_high": hi,
        "min": int(batch.max_loads.min()),
        "max": int(batch.max_loads.max()),
    }


def sweep_to_json(sweep: SweepResult) -> dict:
    return {
        "family": sweep.family_kind,
        "keyset": sweep.keyset_variant,
        "universe_exponent": sweep.universe_exponent,
        "base_seed": sweep.base_seed,
        "rows": [
            {
                "n": row.n,
                "m": row.m,
                "trials": row.trials,
                "row_seed": row.row_seed,
                "mean": row.mean,
                "ci_low": row.ci_low,
                "ci_high": row.ci_high,
                "normalized": row.normalized,
            }
            for row in sweep.rows
        ],
        "fit": {
            "slope": sweep.fit.slope,
            "intercept": sweep.fit.intercept,
            "residuals": list(sweep.fit.residuals),
        },
    }
