"""`expcli`: command-line experiment runner.

Subcommands:

* run      -- seeded training runs with the revert rule active
* baseline -- the control arm (no reverts applied)
* sweep    -- the threshold-sensitivity study
* hist     -- evaluation-return histograms with Gaussian fits
* compare  -- score two reward files against each other

Exit codes: 0 success, 1 runtime failure, 2 invalid input.  Configuration
comes from an optional flat key=value file (--config), overridden by CLI
flags; the CTRLZ_SEED environment variable overrides the master seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiments import (
    ExperimentConfig,
    histogram_report,
    run_batch,
    run_sweep,
    write_cycle_csv,
    write_episode_csv,
    write_summary_json,
    write_sweep_csv,
)
from .stats import COMPARATORS

# Keys accepted in a key=value config file, with their parsers.
CONFIG_KEYS = {
    "env": str,
    "total_train_episodes": int,
    "train_episodes_per_cycle": int,
    "eval_episodes": int,
    "threshold": float,
    "comparator": str,
    "eval_with_noise": lambda s: s.lower() in ("1", "true", "yes"),
    "revert_optimizer_state": lambda s: s.lower() in ("1", "true", "yes"),
    "checkpoint_capacity": int,
    "base_lr": float,
    "gamma": float,
    "hidden": int,
    "log_std_init": float,
    "rmsprop_decay": float,
    "seeds": str,
    "master_seed": int,
    "perturb_low": float,
    "perturb_high": float,
    "outdir": str,
}


class CliError(Exception):
    """Invalid input; maps to exit code 2."""


def parse_seed_list(text: str) -> list[int]:
    """Parse '0..19' ranges and comma-separated seed lists."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, _, hi = part.partition("..")
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError:
                raise CliError(f"bad seed range {part!r}")
            if hi_i < lo_i:
                raise CliError(f"bad seed range {part!r}")
            seeds.extend(range(lo_i, hi_i + 1))
        else:
            try:
                seeds.append(int(part))
            except ValueError:
                raise CliError(f"bad seed {part!r}")
    if not seeds:
        raise CliError(f"no seeds in {text!r}")
    return seeds


def read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: bad config line {line!r}")
        try:
            values[key] = CONFIG_KEYS[key](value.strip())
        except ValueError:
            raise CliError(f"{path}:{lineno}: bad value for {key}")
    return values


def build_config(args, *, baseline: bool) -> tuple[ExperimentConfig, Path]:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        if key in ("perturb_low", "perturb_high", "outdir", "seeds"):
            continue
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "seeds", None) is not None:
        values["seeds"] = args.seeds
    if getattr(args, "perturb", None) is not None:
        low, high = args.perturb
        values["perturb_low"], values["perturb_high"] = low, high

    if "CTRLZ_SEED" in os.environ:
        try:
            values["master_seed"] = int(os.environ["CTRLZ_SEED"])
        except ValueError:
            raise CliError("CTRLZ_SEED must be an integer")

    seeds = parse_seed_list(str(values.pop("seeds", "0")))
    perturbation = None
    if "perturb_low" in values or "perturb_high" in values:
        if not ("perturb_low" in values and "perturb_high" in values):
            raise CliError("perturbation needs both a low and a high multiplier")
        perturbation = (values.pop("perturb_low"), values.pop("perturb_high"))

    outdir = Path(values.pop("outdir", getattr(args, "outdir", None) or "results"))
    if getattr(args, "outdir", None):
        outdir = Path(args.outdir)
    try:
        config = ExperimentConfig(
            seeds=seeds, perturbation=perturbation, baseline=baseline, **values
        )
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc))
    return config, outdir


def add_run_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--env", choices=["cartpole"], default=None)
    parser.add_argument("--comparator", choices=sorted(COMPARATORS), default=None)
    parser.add_argument("--threshold", type=float, default=None)
    parser.add_argument("--seeds", default=None, help="e.g. '0..19' or '0,3,7'")
    parser.add_argument("--lr", dest="base_lr", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--hidden", type=int, default=None)
    parser.add_argument("--log-std-init", dest="log_std_init", type=float, default=None)
    parser.add_argument("--rmsprop-decay", dest="rmsprop_decay", type=float, default=None)
    parser.add_argument("--episodes", dest="total_train_episodes", type=int, default=None,
                        help="total training-episode budget")
    parser.add_argument("--train-per-cycle", dest="train_episodes_per_cycle",
                        type=int, default=None)
    parser.add_argument("--eval-episodes", dest="eval_episodes", type=int, default=None)
    parser.add_argument("--capacity", dest="checkpoint_capacity", type=int, default=None)
    parser.add_argument("--master-seed", dest="master_seed", type=int, default=None)
    parser.add_argument("--perturb", nargs=2, type=float, metavar=("LOW", "HIGH"),
                        default=None, help="per-seed hyperparameter multiplier range")
    parser.add_argument("--outdir", default=None)


def cmd_run(args, *, baseline: bool) -> int:
    config, outdir = build_config(args, baseline=baseline)
    results = run_batch(config)
    summaries = [s for s, _ in results]
    write_episode_csv(outdir / "episodes.csv", results)
    write_cycle_csv(outdir / "cycles.csv", results)
    write_summary_json(outdir / "summary.json", summaries)
    for s in summaries:
        print(f"{s.run_id}: lifetime reward {s.mean_lifetime_reward:.3f} "
              f"(train-only {s.mean_train_reward:.3f}), reverts {s.revert_count}")
    return 0


def cmd_sweep(args) -> int:
    config, outdir = build_config(args, baseline=False)
    try:
        thresholds = [float(t) for t in args.thresholds.split(",") if t.strip()]
    except ValueError:
        raise CliError(f"bad threshold list {args.thresholds!r}")
    if not thresholds:
        raise CliError("at least one threshold is required")
    result = run_sweep(config, thresholds)
    write_sweep_csv(outdir / "sweep.csv", result["rows"])
    write_cycle_csv(outdir / "cycles.csv", result["runs"])
    write_episode_csv(outdir / "episodes.csv", result["runs"])
    write_summary_json(outdir / "summary.json", [s for s, _ in result["runs"]])
    for row in result["rows"]:
        print(f"threshold {row['threshold']:g}: mean reward {row['mean_reward']:.3f} "
              f"+/- {row['std_dev']:.3f}, reverts/run {row['revert_rate']:.2f}")
    return 0


def cmd_hist(args) -> int:
    try:
        cycles = [int(c) for c in args.cycles.split(",") if c.strip()]
    except ValueError:
        raise CliError(f"bad cycle list {args.cycles!r}")
    if not cycles:
        raise CliError("at least one cycle is required")
    try:
        report = histogram_report(args.episodes_csv, cycles, n_bins=args.bins)
    except OSError as exc:
        raise CliError(f"cannot read {args.episodes_csv}: {exc}")
    except KeyError as exc:
        raise CliError(str(exc.args[0]))
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def read_reward_file(path) -> list[float]:
    try:
        lines = Path(path).read_text().split()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    try:
        values = [float(x) for x in lines]
    except ValueError:
        raise CliError(f"{path}: expected newline-separated numbers")
    if not values:
        raise CliError(f"{path}: no values")
    return values


def cmd_compare(args) -> int:
    a = read_reward_file(args.file_a)
    b = read_reward_file(args.file_b)
    score = COMPARATORS[args.comparator](a, b)
    print(f"{score:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expcli", description="Checkpoint-and-revert training experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="seeded training runs with reverts enabled")
    add_run_flags(p_run)

    p_base = sub.add_parser("baseline", help="control runs with reverts disabled")
    add_run_flags(p_base)

    p_sweep = sub.add_parser("sweep", help="threshold sensitivity sweep")
    add_run_flags(p_sweep)
    p_sweep.add_argument("--thresholds", required=True,
                         help="comma-separated thresholds, e.g. '0,0.05,0.1,0.2,0.3,0.5'")

    p_hist = sub.add_parser("hist", help="evaluation-return histograms per cycle")
    p_hist.add_argument("episodes_csv")
    p_hist.add_argument("--cycles", required=True, help="comma-separated cycle indices")
    p_hist.add_argument("--bins", type=int, default=10)
    p_hist.add_argument("--output", default=None)

    p_cmp = sub.add_parser("compare", help="score two reward files")
    p_cmp.add_argument("file_a")
    p_cmp.add_argument("file_b")
    p_cmp.add_argument("--comparator", choices=sorted(COMPARATORS), default="mann_whitney")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args, baseline=False)
        if args.command == "baseline":
            return cmd_run(args, baseline=True)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "hist":
            return cmd_hist(args)
        if args.command == "compare":
            return cmd_compare(args)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
