"""Command-line entry points: run, experiment, blackjack, oracle, stats."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .blackjack import MODES, run_memory_experiment
from .config import load_embodiment_config
from .memory import DEFAULT_BUDGET
from .runner import (
    Condition,
    build_reference_curator,
    run_episode,
    run_experiment,
    run_random_episode,
)
from .sim import load_scenario, min_steps_oracle
from .stats import t_test_holm


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--robot-config", required=True, help="robot description text file")
    p.add_argument("--actions", required=True, help="action interface JSON file")
    p.add_argument("--task", required=True, help="task description text file")
    p.add_argument("--context", default=None, help="optional environment context text file")
    p.add_argument("--scenario", required=True, help="simulated world scenario JSON file")


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=["scripted", "replay", "http", "random"], default="scripted")
    p.add_argument("--rules", default=None, help="scripted-backend rules JSON file")
    p.add_argument("--replay", dest="replay_path", default=None, help="transcript to replay")
    p.add_argument("--record", dest="record_path", default=None, help="transcript sink to record to")
    p.add_argument("--base-url", default=None, help="chat endpoint base URL (http backend)")
    p.add_argument("--model", default=None, help="model name (http backend)")
    p.add_argument("--curator", choices=["reference", "llm"], default="reference")


def _condition_from_args(args, name: str) -> Condition:
    return Condition(
        name=name,
        kind=args.backend,
        rules_path=args.rules,
        transcript_path=args.replay_path,
        record_path=args.record_path,
        base_url=args.base_url,
        model=args.model,
        curator=args.curator,
        step_cap=args.max_steps,
    )


def _cmd_run(args) -> int:
    config = load_embodiment_config(args.robot_config, args.actions, args.task, args.context)
    adapter = load_scenario(args.scenario)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sink = open(out_dir / "steps.jsonl", "w", encoding="utf-8")
    try:
        if args.backend == "random":
            result, _ = run_random_episode(
                config, adapter, step_cap=args.max_steps, seed=args.seed, log_sink=sink
            )
        else:
            condition = _condition_from_args(args, "run")
            backend = condition.make_controller_backend()
            curator = None
            if args.curator == "llm":
                from .memory import LlmCurator

                curator = LlmCurator(backend, build_reference_curator(config))
            result, _ = run_episode(
                config,
                adapter,
                controller_backend=backend,
                curator=curator,
                step_cap=args.max_steps,
                seed=args.seed,
                memory_budget=args.memory_budget,
                log_sink=sink,
            )
    finally:
        sink.close()
    print(
        f"episode finished: steps={result.steps} success={result.success} "
        f"termination={result.termination} log={out_dir / 'steps.jsonl'}"
    )
    return 0 if result.success else 1


def _cmd_experiment(args) -> int:
    config = load_embodiment_config(args.robot_config, args.actions, args.task, args.context)
    adapter = load_scenario(args.scenario)
    conditions = []
    for spec in args.condition:
        name, _, rest = spec.partition("=")
        kind, _, detail = rest.partition(":")
        cond = Condition(name=name, kind=kind or "random", step_cap=args.max_steps)
        if kind == "scripted":
            cond.rules_path = detail
        elif kind == "replay":
            cond.transcript_path = detail
        elif kind == "http":
            cond.base_url, _, cond.model = detail.rpartition("|")
        elif kind == "random":
            cond.step_cap = args.random_cap
        conditions.append(cond)
    summary = run_experiment(
        config, adapter, conditions, episodes=args.episodes, base_seed=args.seed, out_dir=args.out_dir
    )
    print(f"min-steps oracle: {summary.min_steps}")
    for cond in summary.conditions:
        print(
            f"{cond.name}: n={cond.n} steps {cond.formatted} success_rate={cond.success_rate:.2f}"
        )
    for c in summary.comparisons:
        print(f"{c.label}: raw p={c.raw_p:.3g} holm-adjusted p={c.adjusted_p:.3g}")
    return 0


def _cmd_blackjack(args) -> int:
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    modes = args.modes.split(",") if args.modes else list(MODES)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "mode", "score", "cumulative_average"])
        for mode in modes:
            result = run_memory_experiment(
                mode, episodes=args.episodes, seed=args.seed, target=args.target
            )
            for i, (score, avg) in enumerate(zip(result.scores, result.cumulative_average)):
                writer.writerow([i, mode, score, f"{avg:.4f}"])
            line = f"{mode}: final cumulative average {result.final_average:+.3f}"
            if mode in ("curated", "appended"):
                line += f", final belief width {result.final_belief_width}"
            print(line)
    print(f"wrote {out_path}")
    return 0


def _cmd_oracle(args) -> int:
    adapter = load_scenario(args.scenario)
    actions = sorted(adapter.supported_actions())
    print(f"min steps to success: {min_steps_oracle(adapter, actions)}")
    return 0


def _cmd_stats(args) -> int:
    rows = list(csv.DictReader(open(args.episodes_csv, encoding="utf-8")))
    by_condition: dict[str, list[float]] = {}
    for row in rows:
        by_condition.setdefault(row["condition"], []).append(float(row["steps"]))
    names = sorted(by_condition)
    print(json.dumps({name: len(v) for name, v in by_condition.items()}, indent=None))
    import itertools

    pairs = list(itertools.combinations(names, 2))
    if pairs:
        results = t_test_holm(
            [(by_condition[a], by_condition[b]) for a, b in pairs],
            labels=[f"{a} vs {b}" for a, b in pairs],
        )
        for c in results:
            print(f"{c.label}: t={c.statistic:.4f} raw p={c.raw_p:.3g} adjusted p={c.adjusted_p:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="langloop")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single episode")
    _add_config_args(run_p)
    _add_backend_args(run_p)
    run_p.add_argument("--max-steps", type=int, default=60)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--memory-budget", type=int, default=DEFAULT_BUDGET)
    run_p.add_argument("--out-dir", default="out")
    run_p.set_defaults(func=_cmd_run)

    exp_p = sub.add_parser("experiment", help="run a multi-episode comparison")
    _add_config_args(exp_p)
    exp_p.add_argument(
        "--condition",
        action="append",
        required=True,
        help="NAME=KIND[:DETAIL], e.g. agent=scripted:rules.json or baseline=random",
    )
    exp_p.add_argument("--episodes", type=int, default=10)
    exp_p.add_argument("--seed", type=int, default=0)
    exp_p.add_argument("--max-steps", type=int, default=60)
    exp_p.add_argument("--random-cap", type=int, default=25)
    exp_p.add_argument("--out-dir", default="out")
    exp_p.set_defaults(func=_cmd_experiment)

    bj_p = sub.add_parser("blackjack", help="run the hidden-target memory experiment")
    bj_p.add_argument("--modes", default=",".join(MODES))
    bj_p.add_argument("--episodes", type=int, default=200)
    bj_p.add_argument("--seed", type=int, default=0)
    bj_p.add_argument("--target", type=int, default=42)
    bj_p.add_argument("--out", default="out/blackjack.csv")
    bj_p.set_defaults(func=_cmd_blackjack)

    oracle_p = sub.add_parser("oracle", help="BFS minimum steps for a scenario")
    oracle_p.add_argument("--scenario", required=True)
    oracle_p.set_defaults(func=_cmd_oracle)

    stats_p = sub.add_parser("stats", help="recompute statistics from an episodes.csv")
    stats_p.add_argument("episodes_csv")
    stats_p.set_defaults(func=_cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
