"""Command-line entry point: ``cellmatch {simulate,sweep,example-fig2,audit}``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .algorithms import ALGORITHMS
from .channel import realize
from .config import ConfigError, ScenarioConfig
from .fig2 import format_matching, replay
from .harness import records_to_csv, run_scenario, run_seed, sweep, write_outputs
from .matching import (
    InstanceTooLarge,
    Matching,
    blocking_pairs,
    brute_force_opt,
    pda_static_ranking,
    rate_ranking,
    validate,
)
from .preference import build_user_preferences, psi_table


def _parse_overrides(items) -> dict:
    overrides = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _int_list(text: str) -> list[int]:
    """``20,30,40`` or ``20:80:10`` (inclusive stop)."""
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x]


def _resolve_config(args) -> ScenarioConfig:
    config = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    config = config.with_overrides(_parse_overrides(args.set))
    if args.seed is not None:
        config = dataclasses.replace(config, rng_seed=args.seed)
    return config


def _emit(args, records, config, extra=None, trace=None):
    if args.out:
        csv_path, json_path = write_outputs(args.out, records, config, config.rng_seed, extra, trace)
        print(f"wrote {csv_path} and {json_path}")
    else:
        sys.stdout.write(records_to_csv(records, config, config.rng_seed, extra))


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    result = run_scenario(config, args.algorithms, args.runs, config.rng_seed, args.parallel, trace=args.trace)
    _emit(args, result.records, config, {"runs": args.runs, "algorithms": list(args.algorithms)}, result.trace)
    return 0


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    m_values, l_values = _int_list(args.m_values), _int_list(args.l_values)
    records = sweep(config, m_values, l_values, args.runs, config.rng_seed, args.algorithms, args.parallel)
    extra = {"runs": args.runs, "algorithms": list(args.algorithms), "m_values": m_values, "l_values": l_values}
    _emit(args, records, config, extra)
    return 0


def cmd_example_fig2(args) -> int:
    profile, results = replay()
    print("preference lists: " + "  ".join(
        f"UE{m + 1}: ({', '.join(str(l + 1) for l in chi)})" for m, chi in enumerate(profile.user_lists)))
    for name in ("da", "rssi", "pda"):
        r = results[name]
        print(f"{name.upper():4s} {format_matching(r)}  unmatched: {len(r.matching.unmatched)}  rounds: {r.rounds}")
    return 0


def _audit_run(config, master_seed, entry, optimum: bool) -> list[str]:
    rng = np.random.default_rng(run_seed(master_seed, config.num_users, config.num_bs, entry["run"]))
    _, channel = realize(config, rng)
    profile = build_user_preferences(channel.avg_rates, config.rate_threshold)
    rankings = {"pda": pda_static_ranking(profile, psi_table(channel, config)),
                "da": rate_ranking(channel.avg_rates)}
    problems = []
    best = None
    if optimum:
        best = brute_force_opt(channel.avg_rates, config.quotas, config.rate_threshold).total_rate(channel.avg_rates)
    for name, res in sorted(entry["results"].items()):
        matching = Matching.from_assignment([None if b < 0 else b for b in res["assignment"]], config.num_bs)
        tag = f"run {entry['run']} {name}"
        violation = validate(matching, config.quotas)
        if violation:
            problems.append(f"{tag}: invalid matching (condition {violation.condition}): {violation.detail}")
        if name in rankings:
            for bp in blocking_pairs(matching, profile, rankings[name], config.quotas):
                witness = "free slot" if bp.displaced is None else f"displaces user {bp.displaced}"
                problems.append(f"{tag}: blocking pair user {bp.user} / BS {bp.bs} ({witness})")
        proposed = set()
        for rec in res.get("per_round_log") or ():
            for m, l in rec["proposals"]:
                if (m, l) in proposed:
                    problems.append(f"{tag}: user {m} proposed twice to BS {l}")
                proposed.add((m, l))
        if best is not None and matching.total_rate(channel.avg_rates) > best + 1e-9:
            problems.append(f"{tag}: exceeds brute-force optimum")
    return problems


def cmd_audit(args) -> int:
    doc = json.loads(Path(args.trace_file).read_text())
    if "trace" not in doc:
        raise ConfigError(f"{args.trace_file} has no trace; rerun simulate with --trace")
    config = ScenarioConfig.from_dict(doc["config"])
    problems = []
    for entry in doc["trace"]:
        problems.extend(_audit_run(config, doc["master_seed"], entry, args.optimum))
    for line in problems:
        print(line)
    print(f"audited {len(doc['trace'])} runs: {len(problems)} problems")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (a harness JSON output also works)")
    common.add_argument("--out", help="output stem; writes <stem>.csv and <stem>.json")
    common.add_argument("--seed", type=int, help="master seed (overrides rng_seed)")
    common.add_argument("--runs", type=int, default=100, help="Monte Carlo runs per cell")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    common.add_argument("--parallel", type=int, default=None, help="worker processes (default: CPU count)")
    common.add_argument("--algorithms", type=lambda s: tuple(s.split(",")), default=ALGORITHMS,
                        help="comma list from pda,da,rssi")

    parser = argparse.ArgumentParser(prog="cellmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="run one (M, L) cell")
    p.add_argument("--trace", action="store_true", help="embed per-run matchings and round logs in the JSON")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("sweep", parents=[common], help="run a grid of (M, L) cells")
    p.add_argument("--m-values", default="20:80:10")
    p.add_argument("--l-values", default="11")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("example-fig2", help="replay the bundled 6-user worked example")
    p.set_defaults(func=cmd_example_fig2)
    p = sub.add_parser("audit", help="check matchings recorded by simulate --trace")
    p.add_argument("trace_file")
    p.add_argument("--optimum", action="store_true", help="also compare against the brute-force optimum")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "runs", 1) < 1:
            raise ConfigError("--runs must be >= 1")
        for name in getattr(args, "algorithms", ()):
            if name not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {name!r}")
        return args.func(args)
    except (ConfigError, InstanceTooLarge, FileNotFoundError) as exc:
        print(f"cellmatch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
