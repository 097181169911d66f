"""The decision module: one visual query and one action per loop step.

The controller is stateless between steps; everything it knows arrives
through the freshly composed system prompt. Output parsing keys on fixed
single-line markers (QUERY:, ACTION:, PARAMS:) that survive arbitrary
reasoning text around them. Section header strings and markers are part of
the replay-stability contract and must not change casually.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .backends import Backend, ChatMessage, complete
from .config import ActionDef, ActionHistory, ActionInterface, EmbodimentConfig, ProprioState, validate_action
from .errors import ActionParseFailure, QueryParseFailure, UnknownAction
from .memory import EnvironmentMemory, render_memory_text

SECTION_ROBOT = "[Robot description]"
SECTION_ACTIONS = "[Action interface]"
SECTION_MEMORY = "[Environment memory]"
SECTION_PROPRIO = "[Proprioceptive state]"
SECTION_HISTORY = "[Action history]"
SECTION_TASK = "[Task]"
SECTION_ORDER = (
    SECTION_ROBOT,
    SECTION_ACTIONS,
    SECTION_MEMORY,
    SECTION_PROPRIO,
    SECTION_HISTORY,
    SECTION_TASK,
)

QUERY_MARKER = "QUERY:"
ACTION_MARKER = "ACTION:"
PARAMS_MARKER = "PARAMS:"

NO_HISTORY_SENTINEL = "No actions taken yet."


@dataclass(frozen=True)
class ComposedPrompt:
    sections: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        labels = tuple(label for label, _ in self.sections)
        if labels != SECTION_ORDER:
            raise ValueError(f"prompt sections must be exactly {SECTION_ORDER} in order")

    @property
    def text(self) -> str:
        return "\n\n".join(f"{label}\n{body}" for label, body in self.sections)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class VisualQuery:
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("visual query must be non-empty")


@dataclass(frozen=True)
class ControllerDecision:
    reasoning: str
    action: ActionDef
    parameters: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()


def _render_actions(interface: ActionInterface) -> str:
    lines = []
    for a in interface.actions:
        line = f"- {a.name}: {a.description}"
        for p in a.parameters:
            unit = f" {p.unit}" if p.unit else ""
            line += f" [{p.name}: {p.minimum:g}..{p.maximum:g}{unit}, default {p.default:g}]"
        lines.append(line)
    return "\n".join(lines)


def _render_proprio(proprio: ProprioState) -> str:
    lines = []
    if proprio.joint_displacements:
        joints = ", ".join(
            f"{k}={v:g}" for k, v in sorted(proprio.joint_displacements.items())
        )
        lines.append(f"Joint displacements: {joints}")
    if proprio.pose_estimate is not None:
        x, y, heading = proprio.pose_estimate
        lines.append(f"Pose estimate: x={x:g}, y={y:g}, heading={heading:g} deg")
    return "\n".join(lines) or "(no proprioceptive data)"


def _render_history(history: ActionHistory) -> str:
    if not history.entries:
        return NO_HISTORY_SENTINEL
    lines = []
    for e in history.entries:
        suffix = ""
        if e.params:
            suffix = " (" + ", ".join(f"{k}={v:g}" for k, v in e.params) + ")"
        lines.append(f"{e.step}. {e.action}{suffix}")
    return "\n".join(lines)


def _render_task(config: EmbodimentConfig) -> str:
    lines = [config.task.objective]
    if config.task.target_label:
        lines.append(f"Target entity: {config.task.target_label}")
    if config.task.success_hint:
        lines.append(f"Completion criterion: {config.task.success_hint}")
    if config.environment_context:
        lines.append(f"Environment context: {config.environment_context}")
    return "\n".join(lines)


def compose_system_prompt(
    config: EmbodimentConfig,
    memory: EnvironmentMemory,
    proprio: ProprioState,
    history: ActionHistory,
) -> ComposedPrompt:
    """Assemble the six labeled sections, in fixed order."""
    return ComposedPrompt(
        sections=(
            (SECTION_ROBOT, config.robot.text),
            (SECTION_ACTIONS, _render_actions(config.interface)),
            (SECTION_MEMORY, render_memory_text(memory)),
            (SECTION_PROPRIO, _render_proprio(proprio)),
            (SECTION_HISTORY, _render_history(history)),
            (SECTION_TASK, _render_task(config)),
        )
    )


def _marker_line(text: str, marker: str) -> str | None:
    """Last line carrying the marker; text after the marker, trimmed."""
    found = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(marker):
            found = stripped[len(marker) :].strip()
    return found


QUERY_INSTRUCTION = (
    "Step: {step}.\n"
    "Think about what you most need to see to make progress, then state one "
    "question for the robot's cameras.\n"
    f"End your reply with a single line: {QUERY_MARKER} <your question>"
)

QUERY_REPROMPT = (
    f"Your reply had no {QUERY_MARKER} line. Reply again, ending with exactly "
    f"one line that starts with '{QUERY_MARKER} '."
)


def generate_visual_query(prompt: ComposedPrompt, backend: Backend, step: int) -> VisualQuery:
    """First controller call of a step: produce the camera question."""
    messages = [
        ChatMessage("system", prompt.text),
        ChatMessage("user", QUERY_INSTRUCTION.format(step=step)),
    ]
    response = complete(messages, backend)
    question = _marker_line(response, QUERY_MARKER)
    if question:
        return VisualQuery(question)
    retry = messages + [ChatMessage("assistant", response), ChatMessage("user", QUERY_REPROMPT)]
    response = complete(retry, backend)
    question = _marker_line(response, QUERY_MARKER)
    if question:
        return VisualQuery(question)
    raise QueryParseFailure("no QUERY marker found after one reprompt")


ACTION_INSTRUCTION = (
    "Step: {step}.\n"
    "Visual query: {query}\n"
    "Observations:\n{observations}\n"
    "Choose exactly one admissible action. Give your reasoning, then end with "
    f"a line '{ACTION_MARKER} <name>' and, if you want non-default parameters, "
    f"a line '{PARAMS_MARKER} k=v, ...'."
)

ACTION_REPROMPT = (
    "That was not a usable decision. The admissible actions are: {names}. "
    f"Reply again, ending with a line '{ACTION_MARKER} <name>' where <name> is "
    "exactly one of them."
)


def _parse_params(raw: str, action: ActionDef) -> tuple[dict[str, float], list[str]]:
    """Resolve declared parameters: defaults, then overrides, clamped to range."""
    values = action.default_params()
    flags: list[str] = []
    if raw:
        for chunk in raw.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            key, sep, val = chunk.partition("=")
            key = key.strip()
            if not sep:
                flags.append(f"param ignored (no '='): {chunk!r}")
                continue
            spec = next((p for p in action.parameters if p.name == key), None)
            if spec is None:
                flags.append(f"param ignored (undeclared): {key!r}")
                continue
            try:
                number = float(val.strip())
            except ValueError:
                flags.append(f"param ignored (not numeric): {chunk!r}")
                continue
            clamped = spec.clamp(number)
            if clamped != number:
                flags.append(f"param {key} clamped to {clamped:g}")
            values[key] = clamped
    return values, flags


def select_action(
    prompt: ComposedPrompt,
    query: VisualQuery,
    observations: list[tuple[str, str]],
    backend: Backend,
    interface: ActionInterface,
    step: int,
) -> ControllerDecision:
    """Second controller call of a step: pick one validated action."""
    rendered = "\n".join(f"[{cam}] {text}" for cam, text in observations)
    messages = [
        ChatMessage("system", prompt.text),
        ChatMessage(
            "user",
            ACTION_INSTRUCTION.format(step=step, query=query.text, observations=rendered),
        ),
    ]
    last_error: Exception | None = None
    for attempt in range(2):
        response = complete(messages, backend)
        name = _marker_line(response, ACTION_MARKER)
        if name is None:
            last_error = ActionParseFailure("no ACTION marker in controller reply")
        else:
            try:
                action = validate_action(name, interface)
            except UnknownAction as exc:
                last_error = exc
            else:
                params_raw = _marker_line(response, PARAMS_MARKER) or ""
                values, flags = _parse_params(params_raw, action)
                reasoning = response.split(ACTION_MARKER)[0].strip() or "(no reasoning given)"
                return ControllerDecision(
                    reasoning=reasoning, action=action, parameters=values, flags=tuple(flags)
                )
        if attempt == 0:
            messages = messages + [
                ChatMessage("assistant", response),
                ChatMessage("user", ACTION_REPROMPT.format(names=", ".join(interface.names))),
            ]
    assert last_error is not None
    raise last_error
