"""Experiment configuration, seeded run execution, and CSV/JSON artifact emission.

Everything here is deterministic: run ids, per-seed hyperparameter
perturbations, and output bytes are pure functions of the configuration,
so repeating a command reproduces its artifacts exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .envs import make_environment
from .harness import CycleRecord, ScheduleConfig, run_baseline, run_training
from .learner import ReinforceLearner
from .stats import COMPARATORS

EPISODE_CSV_COLUMNS = [
    "run_id", "seed", "threshold", "comparator", "cycle", "phase",
    "episode_index", "episode_return", "rho_min", "reverted",
    "reverted_to", "checkpoint_saved",
]

CYCLE_CSV_COLUMNS = [
    "run_id", "seed", "threshold", "comparator", "cycle",
    "train_mean", "eval_mean", "rho_min", "reverted",
    "reverted_to", "checkpoint_saved",
]

# Hyperparameters subject to per-seed random perturbation.  The initial
# exploration std is perturbed on the std scale (not the log scale), and
# rate-like values are kept inside their valid open intervals.
PERTURBED_HYPERPARAMETERS = ("learning_rate", "gamma", "std_init", "rmsprop_decay")

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "perturbed_hyperparameters",
    "run_single",
    "run_batch",
    "run_sweep",
    "write_episode_csv",
    "write_cycle_csv",
    "histogram_report",
]


@dataclass
class ExperimentConfig:
    """Full description of a seeded experiment batch."""

    env: str = "cartpole"
    total_train_episodes: int = 900
    train_episodes_per_cycle: int = 30
    eval_episodes: int = 20
    threshold: float = 0.1
    comparator: str = "mann_whitney"
    eval_with_noise: bool = True
    revert_optimizer_state: bool = False
    checkpoint_capacity: Optional[int] = None
    base_lr: float = 1e-3
    gamma: float = 0.95
    hidden: int = 32
    log_std_init: float = 0.0
    rmsprop_decay: float = 0.99
    seeds: tuple = (0,)
    master_seed: int = 0
    perturbation: Optional[tuple] = None  # (low, high) multiplier range
    baseline: bool = False

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.perturbation is not None:
            low, high = self.perturbation
            if not (0.0 < low <= high):
                raise ValueError("perturbation range must satisfy 0 < low <= high")
            self.perturbation = (float(low), float(high))
        if self.comparator not in COMPARATORS:
            raise ValueError(
                f"unknown comparator {self.comparator!r}; choose from {sorted(COMPARATORS)}"
            )
        self.schedule()  # validate schedule fields eagerly

    def schedule(self) -> ScheduleConfig:
        return ScheduleConfig(
            total_train_episodes=self.total_train_episodes,
            train_episodes_per_cycle=self.train_episodes_per_cycle,
            eval_episodes=self.eval_episodes,
            threshold=self.threshold,
            comparator=self.comparator,
            eval_with_noise=self.eval_with_noise,
            revert_optimizer_state=self.revert_optimizer_state,
            checkpoint_capacity=self.checkpoint_capacity,
        )


@dataclass
class RunSummary:
    run_id: str
    seed: int
    threshold: float
    comparator: str
    hyperparameters: dict
    mean_train_reward: float
    mean_lifetime_reward: float  # includes evaluation episodes
    revert_count: int
    n_cycles: int


def run_id_for(config: ExperimentConfig, seed: int) -> str:
    return f"{config.env}-{config.comparator}-t{config.threshold:g}-s{seed}"


def perturbed_hyperparameters(config: ExperimentConfig, seed_index: int) -> dict:
    """Hyperparameters for one seed, after any random perturbation.

    Draws depend only on (master seed, seed index): the same seed gets the
    same values in every comparator/threshold arm of a study.
    """
    values = {
        "learning_rate": config.base_lr,
        "gamma": config.gamma,
        "std_init": float(np.exp(config.log_std_init)),
        "rmsprop_decay": config.rmsprop_decay,
    }
    if config.perturbation is not None:
        low, high = config.perturbation
        rng = np.random.default_rng(
            np.random.SeedSequence([int(config.master_seed), int(seed_index)])
        )
        multipliers = rng.uniform(low, high, size=len(PERTURBED_HYPERPARAMETERS))
        for name, m in zip(PERTURBED_HYPERPARAMETERS, multipliers):
            values[name] *= float(m)
        # Rate-like values must stay in (0, 1).
        values["gamma"] = min(values["gamma"], 0.9999)
        values["rmsprop_decay"] = min(values["rmsprop_decay"], 0.9999)
    return values


def _build_learner(config: ExperimentConfig, env, hyper: dict, seed: int) -> ReinforceLearner:
    learner_seed = np.random.SeedSequence([int(config.master_seed), int(seed), 1])
    return ReinforceLearner(
        obs_dim=env.observation_dim,
        act_dim=env.action_dim,
        hidden=config.hidden,
        gamma=hyper["gamma"],
        learning_rate=hyper["learning_rate"],
        log_std_init=float(np.log(hyper["std_init"])),
        rmsprop_decay=hyper["rmsprop_decay"],
        seed=learner_seed,
    )


def run_single(config: ExperimentConfig, seed: int, seed_index: int
               ) -> tuple[RunSummary, list[CycleRecord]]:
    """Execute one seeded run and summarize it."""
    env = make_environment(config.env)
    hyper = perturbed_hyperparameters(config, seed_index)
    learner = _build_learner(config, env, hyper, seed)
    runner = run_baseline if config.baseline else run_training
    records = runner(learner, env, config.schedule(), seed)

    train_returns = [r for rec in records for r in rec.train_returns]
    all_returns = train_returns + [r for rec in records for r in rec.eval_returns]
    summary = RunSummary(
        run_id=run_id_for(config, seed),
        seed=seed,
        threshold=config.threshold,
        comparator=config.comparator,
        hyperparameters=hyper,
        mean_train_reward=float(np.mean(train_returns)),
        mean_lifetime_reward=float(np.mean(all_returns)),
        revert_count=sum(1 for rec in records if rec.reverted_to is not None),
        n_cycles=len(records),
    )
    return summary, records


def run_batch(config: ExperimentConfig) -> list[tuple[RunSummary, list[CycleRecord]]]:
    return [run_single(config, seed, i) for i, seed in enumerate(config.seeds)]


def run_sweep(config: ExperimentConfig, thresholds: list[float]) -> dict:
    """Run the full seed batch at each threshold.

    Returns {"rows": sweep-table rows, "runs": all (summary, records) pairs}.
    The sweep table reports, per threshold, the across-seed mean and std
    dev of mean lifetime reward and the mean revert count per run.
    """
    if not thresholds:
        raise ValueError("at least one threshold is required")
    rows = []
    all_runs = []
    for threshold in thresholds:
        arm = replace(config, threshold=float(threshold))
        results = run_batch(arm)
        all_runs.extend(results)
        lifetime = np.array([s.mean_lifetime_reward for s, _ in results])
        reverts = np.array([s.revert_count for s, _ in results])
        rows.append({
            "threshold": float(threshold),
            "mean_reward": float(np.mean(lifetime)),
            "std_dev": float(np.std(lifetime)),
            "revert_rate": float(np.mean(reverts)),
        })
    return {"rows": rows, "runs": all_runs}


# -- artifact emission -------------------------------------------------------

def episode_rows(summary: RunSummary, records: list[CycleRecord]) -> list[list]:
    rows = []
    episode_index = 0
    for rec in records:
        rho_min = "" if rec.verdict is None else f"{rec.verdict.min_score:.6f}"
        reverted = "" if rec.verdict is None else str(int(rec.reverted_to is not None))
        reverted_to = "" if rec.reverted_to is None else str(rec.reverted_to)
        saved = "" if rec.checkpoint_saved is None else str(rec.checkpoint_saved)
        for phase, returns in (("train", rec.train_returns), ("eval", rec.eval_returns)):
            for ret in returns:
                episode_index += 1
                verdict_cols = (
                    [rho_min, reverted, reverted_to, saved] if phase == "eval"
                    else ["", "", "", ""]
                )
                rows.append([
                    summary.run_id, summary.seed, f"{summary.threshold:g}",
                    summary.comparator, rec.cycle, phase, episode_index,
                    f"{ret:.6f}", *verdict_cols,
                ])
    return rows


def cycle_rows(summary: RunSummary, records: list[CycleRecord]) -> list[list]:
    rows = []
    for rec in records:
        rows.append([
            summary.run_id, summary.seed, f"{summary.threshold:g}",
            summary.comparator, rec.cycle,
            f"{float(np.mean(rec.train_returns)):.6f}",
            f"{float(np.mean(rec.eval_returns)):.6f}",
            "" if rec.verdict is None else f"{rec.verdict.min_score:.6f}",
            "" if rec.verdict is None else str(int(rec.reverted_to is not None)),
            "" if rec.reverted_to is None else str(rec.reverted_to),
            "" if rec.checkpoint_saved is None else str(rec.checkpoint_saved),
        ])
    return rows


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_episode_csv(path, results: list[tuple[RunSummary, list[CycleRecord]]]) -> None:
    rows = [row for summary, records in results for row in episode_rows(summary, records)]
    _write_csv(path, EPISODE_CSV_COLUMNS, rows)


def write_cycle_csv(path, results: list[tuple[RunSummary, list[CycleRecord]]]) -> None:
    rows = [row for summary, records in results for row in cycle_rows(summary, records)]
    _write_csv(path, CYCLE_CSV_COLUMNS, rows)


def write_sweep_csv(path, rows: list[dict]) -> None:
    _write_csv(
        path,
        ["threshold", "mean_reward", "std_dev", "revert_rate"],
        [[f"{r['threshold']:g}", f"{r['mean_reward']:.6f}",
          f"{r['std_dev']:.6f}", f"{r['revert_rate']:.6f}"] for r in rows],
    )


def write_summary_json(path, summaries: list[RunSummary]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [
        {
            "run_id": s.run_id,
            "seed": s.seed,
            "threshold": s.threshold,
            "comparator": s.comparator,
            "hyperparameters": s.hyperparameters,
            "mean_train_reward": s.mean_train_reward,
            "mean_lifetime_reward": s.mean_lifetime_reward,
            "revert_count": s.revert_count,
            "n_cycles": s.n_cycles,
        }
        for s in summaries
    ]
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- histogram reports -------------------------------------------------------

def histogram_report(episode_csv_path, cycles: list[int], n_bins: int = 10) -> dict:
    """Histogram + Gaussian fit of evaluation returns for the requested cycles.

    Equal-width bins over [min, max]; if all returns are identical the
    histogram collapses to a single bin.
    """
    from .stats import gaussian_fit

    by_cycle: dict[int, list[float]] = {}
    with open(episode_csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["phase"] == "eval":
                by_cycle.setdefault(int(row["cycle"]), []).append(float(row["episode_return"]))

    report = {}
    for cycle in cycles:
        if cycle not in by_cycle:
            raise KeyError(f"cycle {cycle} not present in {episode_csv_path}")
        returns = np.array(by_cycle[cycle])
        lo, hi = float(returns.min()), float(returns.max())
        if lo == hi:
            edges = np.array([lo, hi])
            counts = np.array([returns.size])
        else:
            counts, edges = np.histogram(returns, bins=n_bins, range=(lo, hi))
        fit = gaussian_fit(returns)
        report[str(cycle)] = {
            "bin_edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
            "gaussian_fit": {"mean": fit.mean, "std_dev": fit.std_dev},
        }
    return report
