"""Hidden-target card game for exercising cross-episode memory.

The player hits toward an unknown target sum X in [12, 100] (the classic 21
is deliberately not used). Busting loses (-1); sticking scores +1 when the
final sum lands in (X-10, X], else 0. Outcome texts never reveal X; the
only way to play well is to infer a bound interval from outcomes across
episodes, which is exactly the job of the curated-belief mode. Baseline
modes degrade that memory in the ways an agent pipeline can: appending raw
logs into a bounded context, wiping memory between episodes, or acting
randomly.

Interpretation notes (the source material leaves these open): episodes
start from an empty hand (sum 0, no initial deal), cards are ranks 1..13
drawn with replacement and valued min(rank, 10), and the win band is
(X-10, X].
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from random import Random

from .errors import ActionOnFinishedEpisode, InconsistentOutcome

TARGET_MIN = 12
TARGET_MAX = 100

MODES = ("curated", "appended", "no_memory", "random")


@dataclass(frozen=True)
class BlackjackState:
    target: int
    player_sum: int = 0
    done: bool = False

    def __post_init__(self) -> None:
        if not TARGET_MIN <= self.target <= TARGET_MAX:
            raise ValueError(f"target must lie in [{TARGET_MIN}, {TARGET_MAX}]")
        if self.player_sum < 0:
            raise ValueError("player_sum must be non-negative")


@dataclass(frozen=True)
class StepOutcome:
    done: bool
    reward: int
    busted: bool
    final_sum: int | None
    text: str


@dataclass(frozen=True)
class TargetBelief:
    low: int = TARGET_MIN
    high: int = TARGET_MAX

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise InconsistentOutcome(f"belief bounds crossed: [{self.low}, {self.high}]")
        if self.low < TARGET_MIN or self.high > TARGET_MAX:
            raise ValueError(f"belief must stay within [{TARGET_MIN}, {TARGET_MAX}]")

    @property
    def width(self) -> int:
        return self.high - self.low


def draw_card(rng: Random) -> int:
    return min(rng.randint(1, 13), 10)


def blackjack_step(state: BlackjackState, action: str, rng: Random) -> tuple[BlackjackState, StepOutcome]:
    if state.done:
        raise ActionOnFinishedEpisode("episode already finished")
    if action == "hit":
        card = draw_card(rng)
        new_sum = state.player_sum + card
        if new_sum > state.target:
            outcome = StepOutcome(True, -1, True, new_sum, f"hit: drew {card}, bust at {new_sum}")
            return replace(state, player_sum=new_sum, done=True), outcome
        outcome = StepOutcome(False, 0, False, None, f"hit: drew {card}, sum now {new_sum}")
        return replace(state, player_sum=new_sum), outcome
    if action == "stick":
        won = state.target - 10 < state.player_sum <= state.target
        reward = 1 if won else 0
        outcome = StepOutcome(
            True, reward, False, state.player_sum, f"stuck at {state.player_sum}: score {reward}"
        )
        return replace(state, done=True), outcome
    raise ValueError(f"action must be 'hit' or 'stick', got {action!r}")


def belief_update(belief: TargetBelief, final_sum: int, busted: bool) -> TargetBelief:
    """Tighten the interval from one finished episode.

    A bust at s proves X <= s-1; a clean stick at s proves X >= s. Crossed
    bounds raise InconsistentOutcome (the environment or the log is corrupt).
    """
    if busted:
        return TargetBelief(belief.low, min(belief.high, final_sum - 1))
    return TargetBelief(max(belief.low, final_sum), belief.high)


def reference_strategy(belief: TargetBelief, player_sum: int) -> str:
    """Hit while a stick could not score even against the largest plausible target.

    A stick at s scores only when s > X - 10, so while s <= high - 10 sticking
    is worthless and hitting is the only move that can gain information or
    reward. This probes the upper bound (busts shrink it) and, once the
    interval is tight, plays the win band directly.
    """
    return "hit" if player_sum <= belief.high - 10 else "stick"


def play_episode(belief: TargetBelief, target: int, rng: Random) -> StepOutcome:
    """One episode under reference_strategy; returns the terminal outcome."""
    state = BlackjackState(target=target)
    while True:
        action = reference_strategy(belief, state.player_sum)
        state, outcome = blackjack_step(state, action, rng)
        if outcome.done:
            return outcome


# --- experiment modes ---

_LOG_RE = re.compile(r"(bust at|stuck at) (\d+)")


def _belief_from_log(entries: list[str]) -> TargetBelief:
    belief = TargetBelief()
    for entry in entries:
        m = _LOG_RE.search(entry)
        if m is None:
            continue
        belief = belief_update(belief, int(m.group(2)), m.group(1) == "bust at")
    return belief


@dataclass
class MemoryExperimentResult:
    mode: str
    scores: list[int]
    cumulative_average: list[float]
    belief_trace: list[tuple[int, int]]

    @property
    def final_average(self) -> float:
        return self.cumulative_average[-1]

    @property
    def final_belief_width(self) -> int:
        low, high = self.belief_trace[-1]
        return high - low


def run_memory_experiment(
    mode: str,
    episodes: int,
    seed: int,
    target: int = 42,
    appended_budget_chars: int = 2000,
) -> MemoryExperimentResult:
    """Run one memory regime for a number of episodes; fully seed-deterministic."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    rng = Random(seed)
    scores: list[int] = []
    belief_trace: list[tuple[int, int]] = []

    belief = TargetBelief()
    log_entries: list[str] = []

    for _ in range(episodes):
        if mode == "random":
            state = BlackjackState(target=target)
            while True:
                state, outcome = blackjack_step(state, rng.choice(("hit", "stick")), rng)
                if outcome.done:
                    break
            belief_trace.append((TARGET_MIN, TARGET_MAX))
        else:
            if mode == "no_memory":
                belief = TargetBelief()
            elif mode == "appended":
                belief = _belief_from_log(log_entries)
            outcome = play_episode(belief, target, rng)
            if mode == "curated":
                belief = belief_update(belief, outcome.final_sum, outcome.busted)
            elif mode == "appended":
                entry = outcome.text
                used = sum(len(e) + 1 for e in log_entries)
                if used + len(entry) + 1 <= appended_budget_chars:
                    log_entries.append(entry)  # once full, newest entries are lost
            belief_trace.append((belief.low, belief.high))
        scores.append(outcome.reward)

    cumulative: list[float] = []
    total = 0
    for i, s in enumerate(scores, start=1):
        total += s
        cumulative.append(total / i)
    return MemoryExperimentResult(mode, scores, cumulative, belief_trace)
