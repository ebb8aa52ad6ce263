"""Multi-trial experiment runner and the CSV schemas.

Long format (repeated game): ``iteration, trial, tng_total, tng_team_<m>...,
lyapunov`` with one row per sampled iteration per trial.  Markov game:
``episode, trial, mg_tng_total, mg_tng_team_<m>...``.  Each long file gets a
companion aggregate file (same path with ``.agg.csv``) with ``<col>_mean`` and
``<col>_std`` per sampled iteration, std taken over trials with ddof=0.

Trial t runs with the derived stream ``seed XOR t``; trials are independent
and may execute in parallel worker processes, with results canonicalized by
trial index so output is identical to a sequential run.  Floats are written
with shortest round-trip formatting (RFC 4180, '.' decimal separator).
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import DynamicsConfig, RunRecord, run
from .game import MultiTeamGame
from .markov import MarkovConfig, MarkovTeamGame, MGRunRecord, run_mg


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment: one game, one dynamic, several independent trials."""

    dynamics: DynamicsConfig
    trials: int = 10
    mode: str = "self-play"                 # self-play | vs-stationary
    stationary: dict = field(default=None)  # team index -> fixed simplex vector
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.jobs < 1:
            raise ValueError("need at least one worker")


def _one_trial(game, config: ExperimentConfig, trial: int) -> RunRecord:
    return run(game, config.dynamics, mode=config.mode,
               stationary=config.stationary, trial=trial)


def run_trials(game: MultiTeamGame, config: ExperimentConfig) -> list:
    """All trials of an experiment, ordered by trial index."""
    if config.jobs == 1 or config.trials == 1:
        return [_one_trial(game, config, t) for t in range(config.trials)]
    with ProcessPoolExecutor(max_workers=min(config.jobs, config.trials)) as pool:
        futures = [pool.submit(_one_trial, game, config, t) for t in range(config.trials)]
        return [f.result() for f in futures]


def _one_mg_trial(mg, config: MarkovConfig, trial: int) -> MGRunRecord:
    return run_mg(mg, config, trial)


def run_mg_trials(mg: MarkovTeamGame, config: MarkovConfig, trials: int = 10,
                  jobs: int = 1) -> list:
    if trials < 1 or jobs < 1:
        raise ValueError("need at least one trial and one worker")
    if jobs == 1 or trials == 1:
        return [_one_mg_trial(mg, config, t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=min(jobs, trials)) as pool:
        futures = [pool.submit(_one_mg_trial, mg, config, t) for t in range(trials)]
        return [f.result() for f in futures]


def long_columns(num_teams: int, markov: bool = False) -> list:
    if markov:
        return (["episode", "trial", "mg_tng_total"]
                + [f"mg_tng_team_{m}" for m in range(num_teams)])
    return (["iteration", "trial", "tng_total"]
            + [f"tng_team_{m}" for m in range(num_teams)] + ["lyapunov"])


def _record_rows(record, markov: bool):
    axis = record.episodes if markov else record.iterations
    for r in range(len(axis)):
        row = [int(axis[r]), record.trial, record.tng_total[r]]
        row.extend(record.tng_teams[r])
        if not markov:
            row.append(record.lyapunov[r])
        yield row


def _fmt(x) -> str:
    return str(x) if isinstance(x, int) else repr(float(x))


def write_long_csv(records: list, path, num_teams: int, markov: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(long_columns(num_teams, markov))
        for record in sorted(records, key=lambda r: r.trial):
            for row in _record_rows(record, markov):
                w.writerow(_fmt(x) for x in row)


def aggregate_path(path) -> Path:
    p = Path(path)
    return p.with_suffix(".agg.csv") if p.suffix == ".csv" else Path(str(p) + ".agg.csv")


def aggregate_records(records: list, markov: bool = False):
    """Per-iteration mean and std (ddof=0) across trials of every metric column.

    All trials of one experiment share the sampling grid, so rows align
    exactly.  Returns (axis, {column: (mean, std)}) with columns ordered as in
    the long format.
    """
    axis = records[0].episodes if markov else records[0].iterations
    for record in records[1:]:
        other = record.episodes if markov else record.iterations
        if not np.array_equal(axis, other):
            raise ValueError("trials disagree on the metric sampling grid")
    num_teams = records[0].tng_teams.shape[1]
    stats = {}

    def add(name, stack):
        stats[name] = (stack.mean(axis=0), stack.std(axis=0, ddof=0))

    prefix = "mg_tng" if markov else "tng"
    add(f"{prefix}_total", np.stack([r.tng_total for r in records]))
    for m in range(num_teams):
        add(f"{prefix}_team_{m}", np.stack([r.tng_teams[:, m] for r in records]))
    if not markov:
        add("lyapunov", np.stack([r.lyapunov for r in records]))
    return axis, stats


def write_aggregate_csv(records: list, path, markov: bool = False) -> None:
    axis, stats = aggregate_records(records, markov)
    header = ["episode" if markov else "iteration"]
    for name in stats:
        header += [f"{name}_mean", f"{name}_std"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in range(len(axis)):
            row = [str(int(axis[r]))]
            for mean, std in stats.values():
                row += [repr(float(mean[r])), repr(float(std[r]))]
            w.writerow(row)


def write_experiment(records: list, path, num_teams: int, markov: bool = False) -> Path:
    """Write the long-format CSV and its aggregate companion; returns the companion path."""
    write_long_csv(records, path, num_teams, markov)
    agg = aggregate_path(path)
    write_aggregate_csv(records, agg, markov)
    return agg


def read_csv_columns(path) -> dict:
    """Read any of the schemas back as {column: float ndarray}."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                cols[name].append(float(value))
    return {name: np.asarray(values) for name, values in cols.items()}
