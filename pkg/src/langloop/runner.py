"""The closed control loop and multi-episode experiments.

One step = query, observe, decide, dispatch, curate, strictly in that
order; curation for step t always completes before the prompt for step
t+1 is composed. The loop code is identical for every embodiment and every
backend; what varies arrives through config objects.
"""

from __future__ import annotations

import csv
import itertools
import time
from dataclasses import dataclass, field
from pathlib import Path
from random import Random
from typing import IO, Sequence

from .backends import Backend, ReplayBackend, ScriptedBackend, TranscriptRecorder, load_rules
from .config import ActionHistory, EmbodimentConfig
from .controller import compose_system_prompt, generate_visual_query, select_action
from .errors import LangloopError
from .memory import DEFAULT_BUDGET, LlmCurator, ReferenceCurator, empty_memory
from .monitor import MonitorSettings, observe_all
from .records import StepRecord
from .sim import min_steps_oracle, random_policy_step
from .sim.base import RobotAdapter, SearchableAdapter
from .stats import PairwiseComparison, format_mean_se, mean, standard_error, t_test_holm

TERMINATIONS = ("success", "step_cap", "error")


@dataclass(frozen=True)
class EpisodeResult:
    steps: int
    success: bool
    termination: str
    seed: int
    wall_time_s: float

    def __post_init__(self) -> None:
        if self.termination not in TERMINATIONS:
            raise ValueError(f"termination must be one of {TERMINATIONS}")


def build_reference_curator(config: EmbodimentConfig) -> ReferenceCurator:
    return ReferenceCurator(
        camera_facings=config.robot.facing_map(),
        action_motions=config.interface.motion_map(),
        objective=config.task.objective,
    )


def _emit(record: StepRecord, sink: IO[str] | None, records: list[StepRecord]) -> None:
    records.append(record)
    if sink is not None:
        sink.write(record.to_json_line() + "\n")


def run_episode(
    config: EmbodimentConfig,
    adapter: RobotAdapter,
    controller_backend: Backend,
    curator=None,
    vision_backend: Backend | None = None,
    monitor_settings: MonitorSettings | None = None,
    step_cap: int = 60,
    seed: int = 0,
    memory_budget: int = DEFAULT_BUDGET,
    log_sink: IO[str] | None = None,
) -> tuple[EpisodeResult, list[StepRecord]]:
    """Drive the adapter through the five-phase loop until success, cap, or error."""
    missing = set(config.interface.names) - adapter.supported_actions()
    if missing:
        raise ValueError(f"adapter does not implement configured actions: {sorted(missing)}")
    if curator is None:
        curator = build_reference_curator(config)

    started = time.monotonic()
    adapter.reset(seed)
    memory = empty_memory(memory_budget)
    history = ActionHistory()
    records: list[StepRecord] = []

    if adapter.success():
        return EpisodeResult(0, True, "success", seed, time.monotonic() - started), records

    for t in range(1, step_cap + 1):
        record = StepRecord(step=t)
        try:
            proprio = adapter.proprio()
            prompt = compose_system_prompt(config, memory, proprio, history)
            record.prompt_digest = prompt.digest

            query = generate_visual_query(prompt, controller_backend, step=t)
            record.mark_phase("query")
            record.query = query.text

            frames = adapter.sense()
            observations = observe_all(frames, query.text, vision_backend, monitor_settings)
            record.observations = [(o.camera_id, o.text) for o in observations]
            record.mark_phase("observe")

            decision = select_action(
                prompt, query, record.observations, controller_backend, config.interface, step=t
            )
            record.reasoning = decision.reasoning
            record.action = decision.action.name
            record.params = decision.parameters
            record.flags.extend(decision.flags)
            record.mark_phase("decide")

            record.ack = adapter.dispatch(decision.action.name, decision.parameters)
            record.mark_phase("dispatch")
            history.append(t, decision.action.name, decision.parameters)
            record.proprio = adapter.proprio().to_dict()

            memory, curate_flags = curator.curate(memory, record)
            record.flags.extend(curate_flags)
            record.memory = memory.to_dict()
            record.mark_phase("curate")
        except LangloopError as exc:
            record.flags.append(f"step_error: {exc}")
            _emit(record, log_sink, records)
            return EpisodeResult(t, False, "error", seed, time.monotonic() - started), records

        _emit(record, log_sink, records)
        if adapter.success():
            return EpisodeResult(t, True, "success", seed, time.monotonic() - started), records

    return EpisodeResult(step_cap, False, "step_cap", seed, time.monotonic() - started), records


def run_random_episode(
    config: EmbodimentConfig,
    adapter: RobotAdapter,
    step_cap: int = 25,
    seed: int = 0,
    log_sink: IO[str] | None = None,
) -> tuple[EpisodeResult, list[StepRecord]]:
    """Uniform-random action baseline; no model calls, no memory."""
    started = time.monotonic()
    adapter.reset(seed)
    rng = Random(seed)
    records: list[StepRecord] = []
    if adapter.success():
        return EpisodeResult(0, True, "success", seed, time.monotonic() - started), records
    for t in range(1, step_cap + 1):
        action = random_policy_step(config.interface, rng)
        record = StepRecord(step=t, reasoning="(random policy)", action=action.name)
        record.params = action.default_params()
        record.mark_phase("decide")
        record.ack = adapter.dispatch(action.name, record.params)
        record.mark_phase("dispatch")
        record.proprio = adapter.proprio().to_dict()
        _emit(record, log_sink, records)
        if adapter.success():
            return EpisodeResult(t, True, "success", seed, time.monotonic() - started), records
    return EpisodeResult(step_cap, False, "step_cap", seed, time.monotonic() - started), records


# --- experiments ---

@dataclass
class Condition:
    """One experimental arm: a policy/backend pairing plus its step cap."""

    name: str
    kind: str  # scripted | replay | random | http
    rules_path: str | None = None
    transcript_path: str | None = None
    record_path: str | None = None
    base_url: str | None = None
    model: str | None = None
    curator: str = "reference"  # reference | llm
    step_cap: int = 60

    def make_controller_backend(self) -> Backend | None:
        if self.kind == "random":
            return None
        if self.kind == "scripted":
            if not self.rules_path:
                raise ValueError(f"condition {self.name!r}: scripted kind needs rules_path")
            backend: Backend = ScriptedBackend(load_rules(self.rules_path))
        elif self.kind == "replay":
            if not self.transcript_path:
                raise ValueError(f"condition {self.name!r}: replay kind needs transcript_path")
            backend = ReplayBackend(self.transcript_path)
        elif self.kind == "http":
            from .backends import HttpBackend

            if not self.base_url or not self.model:
                raise ValueError(f"condition {self.name!r}: http kind needs base_url and model")
            backend = HttpBackend(self.base_url, self.model)
        else:
            raise ValueError(f"condition {self.name!r}: unknown kind {self.kind!r}")
        if self.record_path:
            backend = TranscriptRecorder(backend, self.record_path)
        return backend


@dataclass
class ConditionStats:
    name: str
    n: int
    mean_steps: float
    se_steps: float
    formatted: str
    success_rate: float
    results: list[EpisodeResult] = field(default_factory=list)


@dataclass
class ExperimentSummary:
    conditions: list[ConditionStats]
    comparisons: list[PairwiseComparison]
    min_steps: int


def run_experiment(
    config: EmbodimentConfig,
    adapter: SearchableAdapter,
    conditions: Sequence[Condition],
    episodes: int,
    base_seed: int,
    out_dir: str | Path | None = None,
    vision_backend: Backend | None = None,
    monitor_settings: MonitorSettings | None = None,
) -> ExperimentSummary:
    """Run every condition for ``episodes`` seeded episodes and aggregate.

    Step means include capped and failed episodes at the step count they
    reached; success rate is reported separately.
    """
    if episodes < 2:
        raise ValueError("experiments need episodes >= 2 for statistics")
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        (out_path / "steps").mkdir(parents=True, exist_ok=True)

    min_steps = min_steps_oracle(adapter, config.interface.names)

    stats: list[ConditionStats] = []
    for condition in conditions:
        results: list[EpisodeResult] = []
        for i in range(episodes):
            seed = base_seed + i
            sink = None
            if out_path is not None:
                sink_path = out_path / "steps" / f"{condition.name}_{i:03d}.jsonl"
                sink = open(sink_path, "w", encoding="utf-8")
            try:
                if condition.kind == "random":
                    result, _ = run_random_episode(
                        config, adapter, step_cap=condition.step_cap, seed=seed, log_sink=sink
                    )
                else:
                    backend = condition.make_controller_backend()
                    curator = None
                    if condition.curator == "llm":
                        curator = LlmCurator(backend, build_reference_curator(config))
                    result, _ = run_episode(
                        config,
                        adapter,
                        controller_backend=backend,
                        curator=curator,
                        vision_backend=vision_backend,
                        monitor_settings=monitor_settings,
                        step_cap=condition.step_cap,
                        seed=seed,
                        log_sink=sink,
                    )
            finally:
                if sink is not None:
                    sink.close()
            results.append(result)
        steps = [float(r.steps) for r in results]
        stats.append(
            ConditionStats(
                name=condition.name,
                n=len(results),
                mean_steps=mean(steps),
                se_steps=standard_error(steps) if len(steps) > 1 else 0.0,
                formatted=format_mean_se(steps),
                success_rate=sum(r.success for r in results) / len(results),
                results=results,
            )
        )

    comparisons: list[PairwiseComparison] = []
    if len(stats) >= 2:
        pairs = list(itertools.combinations(range(len(stats)), 2))
        groups = [
            (
                [float(r.steps) for r in stats[i].results],
                [float(r.steps) for r in stats[j].results],
            )
            for i, j in pairs
        ]
        labels = [f"{stats[i].name} vs {stats[j].name}" for i, j in pairs]
        comparisons = t_test_holm(groups, labels=labels)

    summary = ExperimentSummary(conditions=stats, comparisons=comparisons, min_steps=min_steps)
    if out_path is not None:
        write_episodes_csv(out_path / "episodes.csv", summary)
        write_summary_csv(out_path / "summary.csv", summary)
    return summary


def write_episodes_csv(path: Path, summary: ExperimentSummary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "episode", "seed", "steps", "success", "termination", "wall_time_s"])
        for cond in summary.conditions:
            for i, r in enumerate(cond.results):
                writer.writerow(
                    [cond.name, i, r.seed, r.steps, int(r.success), r.termination, f"{r.wall_time_s:.4f}"]
                )


def write_summary_csv(path: Path, summary: ExperimentSummary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "n", "mean_steps", "se_steps", "mean_se", "success_rate", "min_steps"])
        for cond in summary.conditions:
            writer.writerow(
                [
                    cond.name,
                    cond.n,
                    f"{cond.mean_steps:.4f}",
                    f"{cond.se_steps:.4f}",
                    cond.formatted,
                    f"{cond.success_rate:.3f}",
                    summary.min_steps,
                ]
            )
        writer.writerow([])
        writer.writerow(["comparison", "t", "df", "raw_p", "holm_adjusted_p", "degenerate"])
        for c in summary.comparisons:
            writer.writerow(
                [c.label, f"{c.statistic:.6g}", f"{c.df:.6g}", f"{c.raw_p:.6g}", f"{c.adjusted_p:.6g}", int(c.degenerate)]
            )
