"""Monte Carlo driver: paired runs, aggregation, CSV/JSON export."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .algorithms import ALGORITHMS, run_algorithm
from .channel import realize
from .config import ScenarioConfig
from .preference import build_user_preferences

NUM_BINS = 10
CSV_COLUMNS = ["algorithm", "M", "L", "runs", "avg_utility", "stderr_utility", "worst_scbs_rate",
               "stderr_worst", "unmatched_fraction", "avg_rounds"] + [f"hist_{i}" for i in range(NUM_BINS)]


@dataclass(frozen=True)
class MetricsRecord:
    algorithm: str
    num_users: int
    num_bs: int
    runs: int
    avg_utility_per_ue: float
    stderr_utility: float
    worst_scbs_rate: float
    stderr_worst: float
    unmatched_fraction: float
    avg_rounds: float
    max_rounds: int
    utility_decile_histogram: tuple[float, ...]

    def csv_row(self) -> list:
        return [self.algorithm, self.num_users, self.num_bs, self.runs, self.avg_utility_per_ue,
                self.stderr_utility, self.worst_scbs_rate, self.stderr_worst, self.unmatched_fraction,
                self.avg_rounds, *self.utility_decile_histogram]


@dataclass
class RunOutcome:
    """What one algorithm produced on one channel realization."""

    algorithm: str
    utilities: np.ndarray
    worst_scbs_rate: float
    rounds: int
    assignment: list
    per_round_log: Optional[list] = None


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    master_seed: int
    records: list[MetricsRecord]
    trace: Optional[list[dict]] = field(default=None)


def run_seed(master_seed: int, num_users: int, num_bs: int, run_index: int) -> np.random.SeedSequence:
    """Independent stream for one run of one (M, L) cell."""
    return np.random.SeedSequence(master_seed, spawn_key=(num_users, num_bs, run_index))


def worst_scbs_rate(utilities: np.ndarray, assignment: Sequence[int], num_bs: int) -> float:
    """Minimum over small cells of the mean rate of their users; empty cells count as 0."""
    if num_bs < 2:
        return 0.0
    worst = math.inf
    for l in range(1, num_bs):
        members = [m for m, b in enumerate(assignment) if b == l]
        rate = float(np.mean(utilities[members])) if members else 0.0
        worst = min(worst, rate)
    return worst


def simulate_run(config: ScenarioConfig, algorithms: Sequence[str], master_seed: int, run_index: int,
                 trace: bool = False) -> list[RunOutcome]:
    """Draw one realization and run every algorithm on it."""
    rng = np.random.default_rng(run_seed(master_seed, config.num_users, config.num_bs, run_index))
    _, channel = realize(config, rng)
    profile = build_user_preferences(channel.avg_rates, config.rate_threshold)
    outcomes = []
    for name in algorithms:
        result = run_algorithm(name, profile, channel, config, trace=trace)
        util = result.matching.utilities(channel.avg_rates)
        assignment = result.matching.to_list()
        outcomes.append(RunOutcome(name, util, worst_scbs_rate(util, assignment, config.num_bs),
                                   result.rounds, assignment, result.per_round_log))
    return outcomes


def _simulate_star(args):
    return simulate_run(*args)


def utility_histogram(utilities: Iterable[float], num_bins: int = NUM_BINS,
                      upper: Optional[float] = None) -> tuple[float, ...]:
    """Fractions of utilities in equal-width bins over [0, upper].

    ``upper`` defaults to the largest utility. Values equal to ``upper`` fall
    in the last bin; if everything is zero all mass lands in bin 0.
    """
    values = np.asarray(list(utilities), dtype=float)
    if values.size == 0:
        return (1.0,) + (0.0,) * (num_bins - 1)
    if np.any(values < 0):
        raise ValueError("utilities must be non-negative")
    top = float(values.max()) if upper is None else float(upper)
    if top <= 0:
        return (1.0,) + (0.0,) * (num_bins - 1)
    idx = np.minimum((values / top * num_bins).astype(int), num_bins - 1)
    counts = np.bincount(idx, minlength=num_bins)
    return tuple(float(c) / values.size for c in counts)


def _mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return 0.0, 0.0
    mean = math.fsum(values) / values.size
    if values.size < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (values.size - 1)
    return mean, math.sqrt(var / values.size)


def aggregate(config: ScenarioConfig, algorithms: Sequence[str],
              runs: Sequence[tuple[int, list[RunOutcome]]]) -> list[MetricsRecord]:
    """Metrics over runs given as (run index, outcomes); order of ``runs`` is irrelevant."""
    runs = sorted(runs, key=lambda r: r[0])
    n_users = config.num_users
    per_alg = {name: [] for name in algorithms}
    for _, outcomes in runs:
        for o in outcomes:
            per_alg[o.algorithm].append(o)

    # one histogram scale shared by every algorithm on this run set
    upper = max((float(o.utilities.max()) for os_ in per_alg.values() for o in os_ if o.utilities.size),
                default=0.0)
    records = []
    for name in algorithms:
        outs = per_alg[name]
        mean_util = np.array([float(o.utilities.mean()) if n_users else 0.0 for o in outs])
        worst = np.array([o.worst_scbs_rate for o in outs])
        unmatched = np.array([float(np.sum(np.asarray(o.assignment) < 0)) / n_users if n_users else 0.0
                              for o in outs])
        rounds = np.array([float(o.rounds) for o in outs])
        u_mean, u_err = _mean_and_stderr(mean_util)
        w_mean, w_err = _mean_and_stderr(worst)
        all_utils = np.concatenate([o.utilities for o in outs]) if outs else np.zeros(0)
        records.append(MetricsRecord(
            algorithm=name, num_users=n_users, num_bs=config.num_bs, runs=len(outs),
            avg_utility_per_ue=u_mean, stderr_utility=u_err,
            worst_scbs_rate=w_mean, stderr_worst=w_err,
            unmatched_fraction=_mean_and_stderr(unmatched)[0],
            avg_rounds=_mean_and_stderr(rounds)[0],
            max_rounds=int(rounds.max()) if rounds.size else 0,
            utility_decile_histogram=utility_histogram(all_utils, upper=upper),
        ))
    return records


def default_parallelism() -> int:
    return os.cpu_count() or 1


def run_scenario(config: ScenarioConfig, algorithms: Sequence[str] = ALGORITHMS, num_runs: int = 100,
                 master_seed: Optional[int] = None, parallel: Optional[int] = None,
                 trace: bool = False) -> ScenarioResult:
    """Run ``num_runs`` independent drops of one (M, L) cell.

    Every algorithm sees the same drop in each run. Results do not depend on
    ``parallel``.
    """
    if num_runs < 1:
        raise ValueError("num_runs must be >= 1")
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}")
    seed = config.rng_seed if master_seed is None else master_seed
    parallel = default_parallelism() if parallel is None else max(1, parallel)
    jobs = [(config, tuple(algorithms), seed, i, trace) for i in range(num_runs)]
    if parallel == 1 or num_runs == 1:
        outcomes = [_simulate_star(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_simulate_star, jobs, chunksize=max(1, num_runs // (4 * parallel))))
    runs = list(enumerate(outcomes))
    records = aggregate(config, algorithms, runs)
    trace_out = None
    if trace:
        trace_out = [{
            "run": i,
            "results": {o.algorithm: {"assignment": o.assignment, "rounds": o.rounds,
                                      "per_round_log": o.per_round_log} for o in outs},
        } for i, outs in runs]
    return ScenarioResult(config, seed, records, trace_out)


def sweep(template: ScenarioConfig, m_values: Sequence[int], l_values: Sequence[int], num_runs: int,
          master_seed: Optional[int] = None, algorithms: Sequence[str] = ALGORITHMS,
          parallel: Optional[int] = None) -> list[MetricsRecord]:
    """One record per (L, M, algorithm); each cell is its own run_scenario."""
    if not m_values or not l_values:
        raise ValueError("m_values and l_values must be non-empty")
    records = []
    for l in l_values:
        for m in m_values:
            cfg = template.with_dims(num_users=m, num_bs=l)
            records.extend(run_scenario(cfg, algorithms, num_runs, master_seed, parallel).records)
    return records


def _provenance(config: ScenarioConfig, master_seed: int, extra: Optional[dict] = None) -> dict:
    meta = {"config": config.to_dict(), "master_seed": master_seed}
    if extra:
        meta.update(extra)
    return meta


def records_to_csv(records: Sequence[MetricsRecord], config: ScenarioConfig, master_seed: int,
                   extra: Optional[dict] = None) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_provenance(config, master_seed, extra), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r.csv_row()])
    return buf.getvalue()


def records_to_json(records: Sequence[MetricsRecord], config: ScenarioConfig, master_seed: int,
                    extra: Optional[dict] = None, trace: Optional[list] = None) -> str:
    doc = _provenance(config, master_seed, extra)
    doc["records"] = [asdict(r) for r in records]
    if trace is not None:
        doc["trace"] = trace
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_outputs(out: str | Path, records: Sequence[MetricsRecord], config: ScenarioConfig,
                  master_seed: int, extra: Optional[dict] = None,
                  trace: Optional[list] = None) -> tuple[Path, Path]:
    """Write ``<out>.csv`` and ``<out>.json`` (suffix of ``out`` is dropped)."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    csv_path.write_text(records_to_csv(records, config, master_seed, extra))
    json_path.write_text(records_to_json(records, config, master_seed, extra, trace))
    return csv_path, json_path
