"""Command-line front end.

Subcommands: ``scenarios`` (list built-ins), ``curves`` (dump sampled
exogenous curves), ``simulate`` (run a policy over seeds and report),
``train`` (PPO training with checkpoints and a reward curve), ``ga`` (the
genetic baseline), and ``report`` (merge run reports into a comparison
table).  Every command takes ``--seed``; identical invocations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import agents as agents_mod
from .agents import AGENT_KINDS, EMPIRICAL, create_agent, load_agent
from .baseline_ga import GaConfig, decode, evolve, write_fitness_history
from .exogenous import sample_project_curves, write_curves_csv
from .reward import AGENT_WEIGHTS
from .scenario import (SCENARIO_NAMES, ScenarioError, ScenarioSpec,
                       load_scenario, read_config_overrides, scenario_summary)
from .simulate import (build_report, comparison_table, read_report,
                       run_action_sequence, run_episode, write_comparison_csv,
                       write_daily_log, write_report)
from .trainer import TrainConfig, train


class CliError(Exception):
    pass


def _params_from_args(args):
    overrides = {}
    if getattr(args, "config", None):
        overrides = read_config_overrides(args.config)
        base = overrides.pop("scenario", getattr(args, "scenario", 0))
    else:
        base = getattr(args, "scenario", 0)
    return load_scenario(ScenarioSpec(id=base, overrides=overrides))


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(part) for part in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"cannot parse seed list: {text!r}") from None


def _load_policy(args, params):
    kind = args.agent
    if kind == EMPIRICAL:
        return create_agent(EMPIRICAL, params)
    if not args.checkpoint:
        raise CliError(f"agent {kind!r} needs --checkpoint <path>")
    path = Path(args.checkpoint)
    if not path.exists():
        raise CliError(f"checkpoint not found: {path}")
    agent, _ = load_agent(path)
    if agent.kind != kind:
        raise CliError(
            f"checkpoint holds a {agent.kind!r} agent, not {kind!r}")
    return agent


def cmd_scenarios(args) -> int:
    for sid in sorted(SCENARIO_NAMES):
        print(scenario_summary(sid))
    return 0


def cmd_curves(args) -> int:
    params = _params_from_args(args)
    rng = np.random.default_rng(args.seed)
    curves = sample_project_curves(params, rng)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_curves_csv(out, curves)
    print(f"wrote {len(curves)} days of curves to {out}")
    return 0


def cmd_simulate(args) -> int:
    params = _params_from_args(args)
    agent = _load_policy(args, params)
    seeds = _parse_seeds(args.seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    weights = AGENT_WEIGHTS[1]

    results = {}
    for seed in seeds:
        res = run_episode(agent, params, seed, weights=weights, mode="mean",
                          collect_log=True)
        results[seed] = res
        write_daily_log(out / f"daily_log_seed{seed}.csv", res.log_rows)
        print(f"seed {seed}: {res.status.value} after {res.duration} days, "
              f"cost {res.total_cost:,.0f}, npv {res.npv:,.0f}, "
              f"reward {res.total_reward:.4f}")
    report = build_report(args.scenario, args.agent, results)
    write_report(out / "report.json", report)
    agg = report["aggregate"]
    print(f"completion rate {agg['completion_rate']:.2f}, "
          f"mean duration {agg['mean_duration']:.1f} days, "
          f"mean total cost {agg['mean_total_cost']:,.0f}")
    return 0


def cmd_train(args) -> int:
    params = _params_from_args(args)
    if args.agent == EMPIRICAL:
        raise CliError("the empirical policy is not trainable")
    agent = create_agent(args.agent, params, seed=args.seed)
    cfg = TrainConfig(updates=args.updates, seed=args.seed,
                      horizon=args.horizon)
    out = Path(args.out)

    def progress(row):
        print(f"update {row['update']:4d}: "
              f"reward {row['mean_episode_reward']:8.4f}  "
              f"duration {row['mean_duration']:6.1f}  "
              f"completion {row['completion_rate']:.2f}")

    train(params, agent, cfg, out_dir=out, progress=progress)
    print(f"checkpoints and reward curve written to {out}")
    return 0


def cmd_ga(args) -> int:
    params = _params_from_args(args)
    cfg = GaConfig(population=args.population, generations=args.generations,
                   reps=args.reps, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    every = max(1, args.generations // 20)

    def progress(row):
        if row["generation"] % every == 0:
            print(f"generation {row['generation']:5d}: "
                  f"best {row['best']:8.4f}  mean {row['mean']:8.4f}")

    result = evolve(params, cfg, progress=progress)
    write_fitness_history(out / "fitness_history.csv", result.history)
    np.save(out / "best_chromosome.npy", result.best_bits)

    replay = run_action_sequence(decode(result.best_bits, params), params,
                                 np.random.default_rng(cfg.seed),
                                 collect_log=True)
    write_daily_log(out / "best_daily_log.csv", replay.log_rows)
    report = build_report(args.scenario, "ga", {cfg.seed: replay})
    write_report(out / "report.json", report)
    print(f"best fitness {result.best_fitness:.4f}; replay: "
          f"{replay.status.value} after {replay.duration} days "
          f"({replay.final_state.done_area[2] / params.total_area:.1%} built)")
    return 0


def cmd_report(args) -> int:
    reports = []
    for run_dir in args.runs:
        path = Path(run_dir)
        if path.is_dir():
            path = path / "report.json"
        if not path.exists():
            raise CliError(f"no report.json under {run_dir}")
        reports.append(read_report(path))
    rows, warnings = comparison_table(reports, baseline_index=args.baseline)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_comparison_csv(out / "comparison.csv", rows)
    write_report(out / "comparison.json", {"rows": rows})
    for row in rows:
        print(f"{row['agent']:>12}  duration {row['mean_duration']:6.1f} "
              f"({row['mean_duration_gain_pct']:+.2f}%)  "
              f"total {row['mean_total_cost']:12,.0f} "
              f"({row['mean_total_cost_gain_pct']:+.2f}%)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siteflow",
        description="simulate, train, and benchmark daily resource-flow "
                    "control policies for a multistory concrete project")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", type=int, default=0,
                           help="built-in scenario id (0-6)")
            p.add_argument("--config", type=str, default=None,
                           help="config file with parameter overrides")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deterministic", action="store_true",
                       help="force the single-threaded deterministic sample "
                            "stream (always on in this implementation)")

    p = sub.add_parser("scenarios", help="list built-in scenarios")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("curves", help="sample exogenous curves to CSV")
    common(p)
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="run a policy over seeds")
    common(p)
    p.add_argument("--agent", choices=AGENT_KINDS, default=EMPIRICAL)
    p.add_argument("--checkpoint", type=str, default=None)
    p.add_argument("--seeds", type=str, default="0,1,2,3,4",
                   help="comma-separated evaluation seeds")
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a network agent")
    common(p)
    p.add_argument("--agent", choices=AGENT_KINDS[1:], default="sfpn1")
    p.add_argument("--updates", type=int, default=500)
    p.add_argument("--horizon", type=int, default=1024)
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ga", help="run the genetic-algorithm baseline")
    common(p)
    p.add_argument("--generations", type=int, default=1024)
    p.add_argument("--population", type=int, default=256)
    p.add_argument("--reps", type=int, default=3,
                   help="evaluation repetitions per individual")
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_ga)

    p = sub.add_parser("report", help="compare run reports")
    p.add_argument("runs", nargs="+", help="run directories or report files")
    p.add_argument("--baseline", type=int, default=0,
                   help="index of the baseline run")
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
