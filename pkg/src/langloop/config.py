"""Declarative per-robot configuration: description, action interface, task.

A robot is adopted by authoring three files. The description and the task
are plain UTF-8 text; the action interface is a JSON schema document. The
description may carry two machine-readable convention lines:

    cameras: cam_forward=front, cam_left=left, cam_right=right
    axes: horizontal, vertical, rotational, finger

``cameras:`` is required (every robot has at least one camera); ``axes:``
declares the joint names the position tracker may report. The task file may
carry optional ``target:`` and ``hint:`` lines naming the target entity and
a completion criterion; remaining lines form the objective.

Loaded objects are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import DuplicateActionName, MissingFile, SchemaViolation, UnknownAction
from .memory import Bearing, MotionEvent, SECTORS

IDENTIFIER_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    minimum: float
    maximum: float
    default: float
    unit: str = ""
    description: str = ""

    def __post_init__(self) -> None:
        if not IDENTIFIER_RE.match(self.name):
            raise SchemaViolation(f"parameter name {self.name!r} violates identifier grammar")
        if not self.minimum < self.maximum:
            raise SchemaViolation(
                f"parameter {self.name!r} has degenerate range [{self.minimum}, {self.maximum}]"
            )
        if not self.minimum <= self.default <= self.maximum:
            raise SchemaViolation(f"parameter {self.name!r} default outside its range")

    def clamp(self, value: float) -> float:
        return min(max(value, self.minimum), self.maximum)


@dataclass(frozen=True)
class ActionDef:
    name: str
    description: str
    parameters: tuple[ParamSpec, ...] = ()
    motion: MotionEvent | None = None

    def __post_init__(self) -> None:
        if not IDENTIFIER_RE.match(self.name):
            raise SchemaViolation(f"action name {self.name!r} violates identifier grammar")
        if not self.description:
            raise SchemaViolation(f"action {self.name!r} has no description")

    def default_params(self) -> dict[str, float]:
        return {p.name: p.default for p in self.parameters}


@dataclass(frozen=True)
class ActionInterface:
    actions: tuple[ActionDef, ...]

    def __post_init__(self) -> None:
        if not self.actions:
            raise SchemaViolation("action interface must define at least one action")
        seen: set[str] = set()
        for a in self.actions:
            if a.name in seen:
                raise DuplicateActionName(f"duplicate action name {a.name!r}")
            seen.add(a.name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    @property
    def action_count(self) -> int:
        return len(self.actions)

    def motion_map(self) -> dict[str, MotionEvent]:
        return {a.name: a.motion for a in self.actions if a.motion is not None}


def validate_action(name: str, interface: ActionInterface) -> ActionDef:
    """Exact, case-sensitive lookup; raises UnknownAction with the admissible set."""
    for action in interface.actions:
        if action.name == name:
            return action
    raise UnknownAction(name, interface.names)


@dataclass(frozen=True)
class RobotDescription:
    text: str
    camera_ids: tuple[str, ...]
    camera_facings: tuple[tuple[str, str], ...] = ()
    axes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise SchemaViolation("robot description text must be non-empty")
        if not self.camera_ids:
            raise SchemaViolation("robot description must declare at least one camera")
        if len(set(self.camera_ids)) != len(self.camera_ids):
            raise SchemaViolation("camera ids must be unique")

    def facing_of(self, camera_id: str) -> Bearing:
        for cam, facing in self.camera_facings:
            if cam == camera_id:
                return Bearing.named(facing)
        return Bearing.named("front")

    def facing_map(self) -> dict[str, Bearing]:
        return {cam: self.facing_of(cam) for cam in self.camera_ids}


@dataclass(frozen=True)
class TaskSpec:
    objective: str
    target_label: str | None = None
    success_hint: str | None = None

    def __post_init__(self) -> None:
        if not self.objective.strip():
            raise SchemaViolation("task objective must be non-empty")


@dataclass(frozen=True)
class EmbodimentConfig:
    robot: RobotDescription
    interface: ActionInterface
    task: TaskSpec
    environment_context: str | None = None


@dataclass
class ProprioState:
    """Internally tracked joint displacements and optional planar pose estimate."""

    joint_displacements: dict[str, float] = field(default_factory=dict)
    pose_estimate: tuple[float, float, float] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"joints": dict(sorted(self.joint_displacements.items()))}
        if self.pose_estimate is not None:
            out["pose"] = list(self.pose_estimate)
        return out


@dataclass(frozen=True)
class HistoryEntry:
    step: int
    action: str
    params: tuple[tuple[str, float], ...] = ()


@dataclass
class ActionHistory:
    entries: list[HistoryEntry] = field(default_factory=list)

    def append(self, step: int, action: str, params: dict[str, float]) -> None:
        expected = self.entries[-1].step + 1 if self.entries else 1
        if step != expected:
            raise ValueError(f"history step indices must increase from 1; expected {expected}")
        self.entries.append(HistoryEntry(step, action, tuple(sorted(params.items()))))


# --- file loading ---

def _read_text(path: str | Path, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"{what} file not found: {p}")
    return p.read_text(encoding="utf-8")


def _parse_convention_line(text: str, key: str) -> str | None:
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.lower().startswith(key + ":"):
            return stripped[len(key) + 1 :].strip()
    return None


def load_robot_description(path: str | Path) -> RobotDescription:
    text = _read_text(path, "robot description")
    cameras_line = _parse_convention_line(text, "cameras")
    if cameras_line is None:
        raise SchemaViolation("robot description is missing its 'cameras:' line")
    camera_ids: list[str] = []
    facings: list[tuple[str, str]] = []
    for token in (t.strip() for t in cameras_line.split(",")):
        if not token:
            continue
        cam, _, facing = token.partition("=")
        cam = cam.strip()
        if not cam:
            raise SchemaViolation("empty camera id in 'cameras:' line")
        camera_ids.append(cam)
        if facing:
            facing = facing.strip()
            if facing not in SECTORS:
                raise SchemaViolation(
                    f"camera {cam!r} facing {facing!r} is not one of {SECTORS}"
                )
            facings.append((cam, facing))
    axes_line = _parse_convention_line(text, "axes")
    axes = tuple(t.strip() for t in axes_line.split(",") if t.strip()) if axes_line else ()
    return RobotDescription(
        text=text.strip(), camera_ids=tuple(camera_ids), camera_facings=tuple(facings), axes=axes
    )


_ACTION_FILE_KEYS = {"actions"}
_ACTION_KEYS = {"name", "description", "parameters", "motion"}
_PARAM_KEYS = {"name", "min", "max", "default", "unit", "description"}
_MOTION_KEYS = {"kind", "rotation_sectors"}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaViolation(message)


def load_action_interface(path: str | Path) -> ActionInterface:
    raw_text = _read_text(path, "action interface")
    try:
        doc = json.loads(raw_text)
    except ValueError as exc:
        raise SchemaViolation(f"action file is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "action file top level must be an object")
    unknown = set(doc) - _ACTION_FILE_KEYS
    _require(not unknown, f"action file has unknown top-level keys: {sorted(unknown)}")
    _require(isinstance(doc.get("actions"), list), "field 'actions' must be a list")

    actions: list[ActionDef] = []
    for i, entry in enumerate(doc["actions"]):
        _require(isinstance(entry, dict), f"actions[{i}] must be an object")
        unknown = set(entry) - _ACTION_KEYS
        _require(not unknown, f"actions[{i}] has unknown keys: {sorted(unknown)}")
        _require(isinstance(entry.get("name"), str), f"actions[{i}].name must be a string")
        _require(
            isinstance(entry.get("description"), str), f"actions[{i}].description must be a string"
        )
        params: list[ParamSpec] = []
        for j, p in enumerate(entry.get("parameters", [])):
            _require(isinstance(p, dict), f"actions[{i}].parameters[{j}] must be an object")
            unknown = set(p) - _PARAM_KEYS
            _require(not unknown, f"actions[{i}].parameters[{j}] unknown keys: {sorted(unknown)}")
            for req in ("name", "min", "max", "default"):
                _require(req in p, f"actions[{i}].parameters[{j}] missing field '{req}'")
            params.append(
                ParamSpec(
                    name=p["name"],
                    minimum=float(p["min"]),
                    maximum=float(p["max"]),
                    default=float(p["default"]),
                    unit=p.get("unit", ""),
                    description=p.get("description", ""),
                )
            )
        motion = None
        if "motion" in entry:
            m = entry["motion"]
            _require(isinstance(m, dict), f"actions[{i}].motion must be an object")
            unknown = set(m) - _MOTION_KEYS
            _require(not unknown, f"actions[{i}].motion unknown keys: {sorted(unknown)}")
            _require("kind" in m, f"actions[{i}].motion missing field 'kind'")
            try:
                motion = MotionEvent(kind=m["kind"], rotation_sectors=m.get("rotation_sectors", 0))
            except ValueError as exc:
                raise SchemaViolation(f"actions[{i}].motion invalid: {exc}") from exc
        actions.append(
            ActionDef(
                name=entry["name"],
                description=entry["description"],
                parameters=tuple(params),
                motion=motion,
            )
        )
    return ActionInterface(actions=tuple(actions))


def load_task_spec(path: str | Path) -> TaskSpec:
    text = _read_text(path, "task")
    target = _parse_convention_line(text, "target")
    hint = _parse_convention_line(text, "hint")
    objective_lines = [
        line
        for line in text.splitlines()
        if not line.strip().lower().startswith(("target:", "hint:"))
    ]
    objective = "\n".join(objective_lines).strip()
    return TaskSpec(objective=objective, target_label=target, success_hint=hint)


def load_embodiment_config(
    robot_path: str | Path,
    actions_path: str | Path,
    task_path: str | Path,
    context_path: str | Path | None = None,
) -> EmbodimentConfig:
    """Load and validate the three declarative files (plus optional context)."""
    robot = load_robot_description(robot_path)
    interface = load_action_interface(actions_path)
    task = load_task_spec(task_path)
    context = _read_text(context_path, "environment context").strip() if context_path else None
    return EmbodimentConfig(robot=robot, interface=interface, task=task, environment_context=context)


# --- round-trip serialization ---

def config_to_dict(config: EmbodimentConfig) -> dict:
    return {
        "robot": {
            "text": config.robot.text,
            "camera_ids": list(config.robot.camera_ids),
            "camera_facings": [list(pair) for pair in config.robot.camera_facings],
            "axes": list(config.robot.axes),
        },
        "actions": [
            {
                "name": a.name,
                "description": a.description,
                "parameters": [
                    {
                        "name": p.name,
                        "min": p.minimum,
                        "max": p.maximum,
                        "default": p.default,
                        "unit": p.unit,
                        "description": p.description,
                    }
                    for p in a.parameters
                ],
                "motion": (
                    {"kind": a.motion.kind, "rotation_sectors": a.motion.rotation_sectors}
                    if a.motion
                    else None
                ),
            }
            for a in config.interface.actions
        ],
        "task": {
            "objective": config.task.objective,
            "target_label": config.task.target_label,
            "success_hint": config.task.success_hint,
        },
        "environment_context": config.environment_context,
    }


def config_from_dict(raw: dict) -> EmbodimentConfig:
    robot = RobotDescription(
        text=raw["robot"]["text"],
        camera_ids=tuple(raw["robot"]["camera_ids"]),
        camera_facings=tuple(tuple(p) for p in raw["robot"]["camera_facings"]),
        axes=tuple(raw["robot"]["axes"]),
    )
    actions = tuple(
        ActionDef(
            name=a["name"],
            description=a["description"],
            parameters=tuple(
                ParamSpec(
                    name=p["name"],
                    minimum=p["min"],
                    maximum=p["max"],
                    default=p["default"],
                    unit=p["unit"],
                    description=p["description"],
                )
                for p in a["parameters"]
            ),
            motion=(
                MotionEvent(a["motion"]["kind"], a["motion"]["rotation_sectors"])
                if a.get("motion")
                else None
            ),
        )
        for a in raw["actions"]
    )
    task = TaskSpec(
        objective=raw["task"]["objective"],
        target_label=raw["task"]["target_label"],
        success_hint=raw["task"]["success_hint"],
    )
    return EmbodimentConfig(
        robot=robot,
        interface=ActionInterface(actions),
        task=task,
        environment_context=raw.get("environment_context"),
    )
