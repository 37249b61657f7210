"""Command-line interface.

Subcommands: eval, maxload, tail, scaling, exhaustive, lemma-check,
genkeys, verify.  Every data-producing command embeds its full
configuration in the output; `verify` re-runs a prior JSON output and
checks that the numbers reproduce exactly.

Exit codes: 0 success, 2 usage or validation error, 3 property violation
(close-pair counterexample or verify mismatch), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__, closepairs, report
from .chaintable import build_profile
from .experiment import (
    EXHAUSTIVE_GUARD_P,
    Family,
    FullyRandomFamily,
    LinearFamily,
    MultiplyShiftFamily,
    default_threads,
    estimate_tail,
    exhaustive_expectation,
    family_from_json,
    fit_loglog,
    run_trials,
    scaling_sweep,
)
from .hashfn import (
    HashFamilyId,
    LinearModPParams,
    MultiplyShiftParams,
    linear_eval,
    multiply_shift_eval,
    sample_fully_random,
)
from .keysets import KeyFileError, KeySetSpec, generate, save_keys
from .rng import SplitMix64

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_IO = 4

_FAMILY_SHORT = {"linear": "linear-mod-p", "ms": "multiply-shift", "random": "fully-random"}

_DEFAULT_N_GRID = "256,1024,4096,16384,65536"
_ALL_KEYSETS = "interval,arithmetic-progression,grid-sumset,uniform-random"


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _family_from_args(args) -> Family:
    kind = _FAMILY_SHORT[args.family]
    if kind == HashFamilyId.LINEAR_MOD_P.value:
        if args.p is None or args.m is None:
            raise ValueError("linear family needs --p and --m")
        return LinearFamily(p=args.p, m=args.m)
    if kind == HashFamilyId.MULTIPLY_SHIFT.value:
        if args.r is None or args.l is None:
            raise ValueError("multiply-shift family needs --r and --l")
        return MultiplyShiftFamily(r=args.r, ell=args.l)
    if args.m is None:
        raise ValueError("fully-random family needs --m")
    return FullyRandomFamily(m=args.m)


def _keys_config_from_args(args, family: Family) -> dict:
    """The keyset part of the run config: either explicit keys or a spec."""
    if getattr(args, "keys", None):
        return {"keys": _ints(args.keys)}
    universe = getattr(args, "universe", None) or family.universe
    if universe is None:
        raise ValueError("fully-random family needs --universe for generated key sets")
    variant = args.keyset
    fields: dict = {"variant": variant, "universe": universe}
    if variant in ("interval", "arithmetic-progression"):
        if args.n is None:
            raise ValueError(f"{variant} key set needs --n")
        fields["n"] = args.n
        fields["start"] = args.start
        if variant == "arithmetic-progression":
            if args.stride is None:
                raise ValueError("arithmetic-progression needs --stride")
            fields["stride"] = args.stride
    elif variant == "grid-sumset":
        if args.n1 is None or args.n2 is None or args.stride is None:
            raise ValueError("grid-sumset needs --n1, --n2 and --stride")
        fields.update(n1=args.n1, n2=args.n2, stride=args.stride)
    elif variant == "uniform-random":
        if args.n is None or args.key_seed is None:
            raise ValueError("uniform-random needs --n and --key-seed")
        fields.update(n=args.n, seed=args.key_seed)
    elif variant == "from-file":
        if args.keys_file is None:
            raise ValueError("from-file needs --keys-file")
        fields["path"] = args.keys_file
    spec = KeySetSpec(**fields)
    return {"keyset": spec.to_json()}


def _keys_from_config(cfg: dict):
    if "keys" in cfg:
        return cfg["keys"]
    return KeySetSpec.from_json(cfg["keyset"])


# ---------------------------------------------------------------------------
# result computation, shared between direct runs and `verify`


def _compute_maxload(config: dict, threads: int) -> tuple[dict, object]:
    family = family_from_json(config["family"])
    batch = run_trials(
        family,
        _keys_from_config(config),
        config["trials"],
        config["base_seed"],
        threads=threads,
        force_a=config.get("force_a"),
        force_b=config.get("force_b"),
    )
    return report.batch_summary(batch), batch


def _compute_tail(config: dict, threads: int) -> tuple[dict, object]:
    summary, batch = _compute_maxload(config, threads)
    tails = []
    for alpha in config["alphas"]:
        est = estimate_tail(batch, alpha)
        tails.append(
            {
                "alpha": est.alpha,
                "threshold": est.threshold,
                "p_hat": est.p_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "exceed_count": est.exceed_count,
            }
        )
    summary["tails"] = tails
    return summary, batch


def _compute_scaling(config: dict, threads: int) -> tuple[dict, list]:
    if "self_test_exponent" in config:
        exponent = config["self_test_exponent"]
        ns = config["n_grid"]
        means = [float(n) ** exponent for n in ns]
        fit = fit_loglog(ns, means)
        return (
            {
                "self_test": True,
                "rows": [{"n": n, "mean": mu} for n, mu in zip(ns, means)],
                "fit": {
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "residuals": list(fit.residuals),
                },
            },
            [],
        )
    sweeps = []
    for variant in config["keysets"]:
        sweeps.append(
            scaling_sweep(
                config["family_kind"],
                variant,
                config["n_grid"],
                config["trials"],
                config["base_seed"],
                universe_exponent=config["universe_exponent"],
                threads=threads,
            )
        )
    worst = max(sweeps, key=lambda s: s.fit.slope)
    results = {
        "sweeps": [report.sweep_to_json(s) for s in sweeps],
        "worst_keyset": worst.keyset_variant,
        "worst_slope": worst.fit.slope,
    }
    return results, sweeps


def _compute_exhaustive(config: dict, threads: int) -> tuple[dict, object]:
    keys = _keys_from_config(config)
    if isinstance(keys, KeySetSpec):
        keys = generate(keys)
    res = exhaustive_expectation(
        config["p"],
        config["m"],
        keys,
        guard_p=config.get("guard_p", EXHAUSTIVE_GUARD_P),
        threads=threads,
    )
    mean = res.mean_exact()
    return (
        {
            "p": res.p,
            "m": res.m,
            "n": res.n,
            "seed_count": res.seed_count,
            "mean": float(mean),
            "mean_exact": f"{mean.numerator}/{mean.denominator}",
            "distribution": [
                [v, int(c)] for v, c in enumerate(res.hist) if c > 0
            ],
        },
        res,
    )


def _compute_lemma(config: dict, threads: int) -> tuple[dict, object]:
    res = closepairs.run_campaign(
        config["instances"],
        config["base_seed"],
        r_max=config["r_max"],
        load_min=config["load_min"],
        load_max=config["load_max"],
    )
    return (
        {
            "instances_checked": res.instances_checked,
            "infeasible_draws": res.infeasible_draws,
            "failure_count": len(res.failures),
            "all_hold": res.all_hold,
        },
        res,
    )


_COMPUTERS = {
    "maxload": _compute_maxload,
    "tail": _compute_tail,
    "scaling": _compute_scaling,
    "exhaustive": _compute_exhaustive,
    "lemma-check": _compute_lemma,
}


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_eval(args) -> int:
    if args.family == "linear":
        for name in ("p", "m", "a", "b"):
            if getattr(args, name) is None:
                raise ValueError(f"eval --family linear needs --{name}")
        params = LinearModPParams(p=args.p, m=args.m, a=args.a, b=args.b)
        print(linear_eval(params, args.x))
    elif args.family == "ms":
        for name in ("r", "l", "a"):
            if getattr(args, name) is None:
                raise ValueError(f"eval --family ms needs --{name}")
        params = MultiplyShiftParams(r=args.r, ell=args.l, a=args.a)
        print(multiply_shift_eval(params, args.x))
    else:
        raise ValueError("eval supports --family linear or ms")
    return EXIT_OK


def _base_config(args, family: Family) -> dict:
    cfg = {"family": family.to_json(), "base_seed": args.base_seed, "trials": args.trials}
    cfg.update(_keys_config_from_args(args, family))
    cfg["threads"] = args.threads if args.threads is not None else default_threads()
    return cfg


def _write_profile(args, config, batch) -> None:
    idx = args.profile_trial
    if not 0 <= idx < batch.trials:
        raise ValueError(f"--profile-trial {idx} outside [0, {batch.trials})")
    family = batch.family
    keys = [int(x) for x in sorted(set(_resolve_key_list(config)))]
    if isinstance(family, LinearFamily):
        h = LinearModPParams(
            p=family.p, m=family.m, a=int(batch.seeds_a[idx]), b=int(batch.seeds_b[idx])
        )
    elif isinstance(family, MultiplyShiftFamily):
        h = MultiplyShiftParams(r=family.r, ell=family.ell, a=int(batch.seeds_a[idx]))
    else:
        h = sample_fully_random(keys, family.m, SplitMix64.for_stream(batch.base_seed, idx))
    profile = build_profile(keys, h, family.m)
    if max(profile.counts) != int(batch.max_loads[idx]):
        raise AssertionError("profile disagrees with the recorded max load")
    report.write_profile_csv(profile, {**config, "profile_trial": idx}, args.profile_out)


def _resolve_key_list(config: dict) -> list[int]:
    keys = _keys_from_config(config)
    if isinstance(keys, KeySetSpec):
        return generate(keys)
    return sorted(keys)


def _cmd_maxload(args) -> int:
    family = _family_from_args(args)
    config = _base_config(args, family)
    if args.force_a is not None:
        config["force_a"] = args.force_a
    if args.force_b is not None:
        config["force_b"] = args.force_b
    results, batch = _compute_maxload(config, config["threads"])
    if args.csv:
        report.write_trials_csv(batch, config, args.csv)
    if args.profile_out:
        _write_profile(args, config, batch)
    report.write_json(report.json_envelope("maxload", config, results), args.out)
    return EXIT_OK


def _cmd_tail(args) -> int:
    family = _family_from_args(args)
    config = _base_config(args, family)
    config["alphas"] = _floats(args.alphas)
    if any(a < 1 for a in config["alphas"]):
        raise ValueError("alphas must all be >= 1")
    results, batch = _compute_tail(config, config["threads"])
    if args.csv:
        report.write_trials_csv(batch, config, args.csv)
    report.write_json(report.json_envelope("tail", config, results), args.out)
    return EXIT_OK


def _cmd_scaling(args) -> int:
    threads = args.threads if args.threads is not None else default_threads()
    if args.self_test_exponent is not None:
        config = {
            "self_test_exponent": args.self_test_exponent,
            "n_grid": _ints(args.n_grid),
            "threads": threads,
        }
        results, _ = _compute_scaling(config, threads)
        report.write_json(report.json_envelope("scaling", config, results), args.out)
        return EXIT_OK
    config = {
        "family_kind": _FAMILY_SHORT[args.family],
        "keysets": [k.strip() for k in args.keysets.split(",") if k.strip()],
        "n_grid": _ints(args.n_grid),
        "trials": args.trials,
        "base_seed": args.base_seed,
        "universe_exponent": args.universe_exponent,
        "threads": threads,
    }
    results, sweeps = _compute_scaling(config, threads)
    if args.csv:
        report.write_scaling_csv(sweeps, config, args.csv)
    report.write_json(report.json_envelope("scaling", config, results), args.out)
    return EXIT_OK


def _cmd_exhaustive(args) -> int:
    family = LinearFamily(p=args.p, m=args.m)
    config: dict = {"p": args.p, "m": args.m}
    config.update(_keys_config_from_args(args, family))
    if args.guard_p is not None:
        config["guard_p"] = args.guard_p
    config["threads"] = args.threads if args.threads is not None else default_threads()
    results, _ = _compute_exhaustive(config, config["threads"])
    report.write_json(report.json_envelope("exhaustive", config, results), args.out)
    return EXIT_OK


def _cmd_lemma_check(args) -> int:
    config = {
        "instances": args.instances,
        "base_seed": args.base_seed,
        "r_max": args.r_max,
        "load_min": args.load_min,
        "load_max": args.load_max,
        "threads": args.threads if args.threads is not None else default_threads(),
    }
    results, res = _compute_lemma(config, config["threads"])
    report.write_json(report.json_envelope("lemma-check", config, results), args.out)
    if res.failures:
        closepairs.dump_counterexample(dict(res.failures[0]), args.dump)
        print(f"counterexample written to {args.dump}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_genkeys(args) -> int:
    spec_fields: dict = {"variant": args.variant, "universe": args.universe}
    if args.variant in ("interval", "arithmetic-progression"):
        spec_fields.update(n=args.n, start=args.start)
        if args.variant == "arithmetic-progression":
            spec_fields["stride"] = args.stride
    elif args.variant == "grid-sumset":
        spec_fields.update(n1=args.n1, n2=args.n2, stride=args.stride)
    elif args.variant == "uniform-random":
        spec_fields.update(n=args.n, seed=args.key_seed)
    else:
        raise ValueError("genkeys generates interval, arithmetic-progression, "
                         "grid-sumset or uniform-random sets")
    keys = generate(KeySetSpec(**spec_fields))
    save_keys(keys, args.out)
    print(f"{len(keys)} keys written to {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        prior = json.load(fh)
    command = prior.get("command")
    if command not in _COMPUTERS:
        raise ValueError(f"cannot verify outputs of command {command!r}")
    threads = args.threads if args.threads is not None else default_threads()
    fresh, _ = _COMPUTERS[command](prior["config"], threads)
    want = json.dumps(prior["results"], sort_keys=True)
    got = json.dumps(fresh, sort_keys=True)
    if want != got:
        print("verify: MISMATCH", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"verify: ok ({command})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser


def _add_family_flags(sp, include_random=True):
    choices = ["linear", "ms"] + (["random"] if include_random else [])
    sp.add_argument("--family", required=True, choices=choices)
    sp.add_argument("--p", type=int, help="prime modulus (linear)")
    sp.add_argument("--m", type=int, help="bucket count (linear / random)")
    sp.add_argument("--r", type=int, help="word-size exponent (multiply-shift)")
    sp.add_argument("--l", type=int, help="output exponent (multiply-shift)")


def _add_keyset_flags(sp):
    sp.add_argument("--keyset", default="interval", choices=[
        "interval", "arithmetic-progression", "grid-sumset", "uniform-random", "from-file"
    ])
    sp.add_argument("--keys", help="explicit comma-separated keys (overrides --keyset)")
    sp.add_argument("--n", type=int, help="key count")
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--stride", type=int)
    sp.add_argument("--n1", type=int, help="grid-sumset block count")
    sp.add_argument("--n2", type=int, help="grid-sumset block size")
    sp.add_argument("--key-seed", type=int, help="seed for uniform-random keys")
    sp.add_argument("--keys-file", help="path for the from-file variant")
    sp.add_argument("--universe", type=int, help="exclusive key bound "
                    "(defaults to the family universe)")


def _add_run_flags(sp):
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--base-seed", type=int, default=0)
    sp.add_argument("--threads", type=int, help="worker threads "
                    "(default: MAXCHAIN_THREADS or 1); results never depend on this")
    sp.add_argument("--out", help="JSON output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="maxchain",
        description="Max-load experiments for linear mod-p and multiply-shift hashing",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", help="evaluate one hash function at one key")
    _add_family_flags(sp, include_random=False)
    sp.add_argument("--a", type=int, help="multiplier seed")
    sp.add_argument("--b", type=int, help="offset seed (linear)")
    sp.add_argument("--x", type=int, required=True, help="key to hash")
    sp.set_defaults(handler=_cmd_eval)

    sp = sub.add_parser("maxload", help="Monte Carlo max-load trials")
    _add_family_flags(sp)
    _add_keyset_flags(sp)
    _add_run_flags(sp)
    sp.add_argument("--csv", help="per-trial CSV output path")
    sp.add_argument("--force-a", type=int, help="diagnostic: fix the linear multiplier")
    sp.add_argument("--force-b", type=int, help="diagnostic: fix the linear offset")
    sp.add_argument("--profile-out", help="write the bucket profile of one trial (CSV)")
    sp.add_argument("--profile-trial", type=int, default=0)
    sp.set_defaults(handler=_cmd_maxload)

    sp = sub.add_parser("tail", help="empirical Pr[M >= 4*alpha] with Wilson intervals")
    _add_family_flags(sp)
    _add_keyset_flags(sp)
    _add_run_flags(sp)
    sp.add_argument("--alphas", default="1,2,4", help="comma-separated alpha values")
    sp.add_argument("--csv", help="per-trial CSV output path")
    sp.set_defaults(handler=_cmd_tail)

    sp = sub.add_parser("scaling", help="mean max load across an n grid with m = n")
    sp.add_argument("--family", choices=["linear", "ms", "random"], default="linear")
    sp.add_argument("--keysets", default=_ALL_KEYSETS,
                    help="comma-separated key set variants")
    sp.add_argument("--n-grid", default=_DEFAULT_N_GRID)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--base-seed", type=int, default=0)
    sp.add_argument("--universe-exponent", type=int, default=30)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="JSON output path (default stdout)")
    sp.add_argument("--csv", help="per-row CSV output path")
    sp.add_argument("--self-test-exponent", type=float,
                    help="fit synthetic mean = n**exponent rows instead of running trials")
    sp.set_defaults(handler=_cmd_scaling)

    sp = sub.add_parser("exhaustive", help="exact E[M] over every linear seed")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    _add_keyset_flags(sp)
    sp.add_argument("--guard-p", type=int, help="override the p enumeration guard")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="JSON output path (default stdout)")
    sp.set_defaults(handler=_cmd_exhaustive)

    sp = sub.add_parser("lemma-check", help="randomized close-pair lemma campaign")
    sp.add_argument("--instances", type=int, default=1000)
    sp.add_argument("--base-seed", type=int, default=0)
    sp.add_argument("--r-max", type=int, default=10_000)
    sp.add_argument("--load-min", type=int, default=2)
    sp.add_argument("--load-max", type=int, default=8)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="JSON output path (default stdout)")
    sp.add_argument("--dump", default="lemma-counterexample.json",
                    help="where to write a counterexample, if one appears")
    sp.set_defaults(handler=_cmd_lemma_check)

    sp = sub.add_parser("genkeys", help="generate a key file")
    sp.add_argument("--variant", required=True, choices=[
        "interval", "arithmetic-progression", "grid-sumset", "uniform-random"
    ])
    sp.add_argument("--universe", type=int, required=True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--start", type=int, default=0)
    sp.add_argument("--stride", type=int)
    sp.add_argument("--n1", type=int)
    sp.add_argument("--n2", type=int)
    sp.add_argument("--key-seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(handler=_cmd_genkeys)

    sp = sub.add_parser("verify", help="re-run a prior JSON output and compare")
    sp.add_argument("file")
    sp.add_argument("--threads", type=int)
    sp.set_defaults(handler=_cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
