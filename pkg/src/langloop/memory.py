"""Bounded, structured environment memory and its curators.

The memory holds four fixed categories (physical environment, robot state,
curated history, task state) and is rewritten, not appended, after every
step. Object positions are kept as coarse 8-sector bearings relative to the
robot's current pose and shifted as the robot moves. A deterministic
reference curator implements the rewrite rules directly; an LLM curator
delegates the rewrite to a backend and falls back to the reference rules
whenever the reply does not fit the schema or the budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .backends import Backend, ChatMessage, complete
from .errors import LangloopError
from .monitor import parse_visibility_answer
from .records import StepRecord

SECTORS = (
    "front",
    "front-right",
    "right",
    "back-right",
    "back",
    "back-left",
    "left",
    "front-left",
)

_SECTOR_INDEX = {name: i for i, name in enumerate(SECTORS)}

ROTATE_KINDS = ("rotate_left", "rotate_right")
MOTION_KINDS = ROTATE_KINDS + (
    "translate_left",
    "translate_right",
    "translate_forward",
    "translate_backward",
    "none",
)


@dataclass(frozen=True)
class Bearing:
    """Relative direction in eighths of a turn, clockwise from straight ahead."""

    sector: int

    def __post_init__(self) -> None:
        if not 0 <= self.sector <= 7:
            raise ValueError(f"sector must be in [0, 7], got {self.sector}")

    @property
    def name(self) -> str:
        return SECTORS[self.sector]

    @classmethod
    def named(cls, name: str) -> "Bearing":
        if name not in _SECTOR_INDEX:
            raise ValueError(f"unknown bearing {name!r}; expected one of {SECTORS}")
        return cls(_SECTOR_INDEX[name])


@dataclass(frozen=True)
class MotionEvent:
    kind: str
    rotation_sectors: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MOTION_KINDS:
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if self.kind in ROTATE_KINDS and self.rotation_sectors <= 0:
            raise ValueError("rotate motions need rotation_sectors > 0")
        if self.kind not in ROTATE_KINDS and self.rotation_sectors != 0:
            raise ValueError("rotation_sectors > 0 only for rotate kinds")


MOTION_NONE = MotionEvent("none")


def _sector_shift(event: MotionEvent) -> int:
    # A left (counter-clockwise) robot rotation moves fixed objects clockwise
    # in the robot frame; a leftward translation nudges them one sector clockwise.
    if event.kind == "rotate_left":
        return event.rotation_sectors
    if event.kind == "rotate_right":
        return -event.rotation_sectors
    if event.kind == "translate_left":
        return 1
    if event.kind == "translate_right":
        return -1
    return 0


def update_bearing(bearing: Bearing, event: MotionEvent) -> Bearing:
    """Bearing of a fixed object after the robot performs ``event``."""
    return Bearing((bearing.sector + _sector_shift(event)) % 8)


def infer_position_from_detection(camera_facing: Bearing, last_motion: MotionEvent) -> Bearing:
    """Bearing of a newly detected object relative to the pose before ``last_motion``.

    The detection pins the object at the camera's facing bearing in the
    current pose; undoing the last motion expresses it in the pose the robot
    held before the move that brought the object into view.
    """
    return Bearing((camera_facing.sector - _sector_shift(last_motion)) % 8)


# --- memory structure ---

DISTANCE_CLASSES = ("near", "mid", "far", "unknown")
_SIZE_TO_DISTANCE = {"large": "near", "medium": "mid", "small": "far"}
_FRAME_OFFSET = {"left": -1, "center": 0, "right": 1}
_EVICT_RANK = {"unknown": 0, "far": 1, "mid": 2, "near": 3}

HEADER_PHYSICAL = "[Physical environment]"
HEADER_ROBOT = "[Robot state]"
HEADER_HISTORY = "[Curated history]"
HEADER_TASK = "[Task state]"
MEMORY_HEADERS = (HEADER_PHYSICAL, HEADER_ROBOT, HEADER_HISTORY, HEADER_TASK)
EMPTY_SENTINEL = "(nothing recorded yet)"

MIN_BUDGET = 512
DEFAULT_BUDGET = 8000


@dataclass(frozen=True)
class ObjectEntry:
    label: str
    bearing: Bearing
    distance_class: str = "unknown"
    properties: str = ""
    last_seen_step: int = 0

    def __post_init__(self) -> None:
        if self.distance_class not in DISTANCE_CLASSES:
            raise ValueError(f"distance_class must be one of {DISTANCE_CLASSES}")


@dataclass
class EnvironmentMemory:
    scene_text: str = ""
    objects: list[ObjectEntry] = field(default_factory=list)
    robot_state_text: str = ""
    history_notes: list[str] = field(default_factory=list)
    task_state_text: str = ""
    size_budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if self.size_budget < MIN_BUDGET:
            raise ValueError(f"size_budget must be at least {MIN_BUDGET} characters")

    def to_dict(self) -> dict:
        return {
            "scene_text": self.scene_text,
            "objects": [
                {
                    "label": o.label,
                    "bearing": o.bearing.name,
                    "distance_class": o.distance_class,
                    "properties": o.properties,
                    "last_seen_step": o.last_seen_step,
                }
                for o in self.objects
            ],
            "robot_state_text": self.robot_state_text,
            "history_notes": list(self.history_notes),
            "task_state_text": self.task_state_text,
            "size_budget": self.size_budget,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EnvironmentMemory":
        return cls(
            scene_text=raw["scene_text"],
            objects=[
                ObjectEntry(
                    label=o["label"],
                    bearing=Bearing.named(o["bearing"]),
                    distance_class=o["distance_class"],
                    properties=o["properties"],
                    last_seen_step=o["last_seen_step"],
                )
                for o in raw["objects"]
            ],
            robot_state_text=raw["robot_state_text"],
            history_notes=list(raw["history_notes"]),
            task_state_text=raw["task_state_text"],
            size_budget=raw["size_budget"],
        )


def empty_memory(size_budget: int = DEFAULT_BUDGET) -> EnvironmentMemory:
    return EnvironmentMemory(size_budget=size_budget)


def render_memory_text(memory: EnvironmentMemory) -> str:
    """Deterministic rendering of the four categories, in fixed order."""
    parts: list[str] = []

    physical_lines: list[str] = []
    if memory.scene_text:
        physical_lines.append(memory.scene_text)
    if memory.objects:
        physical_lines.append("Objects:")
        for o in memory.objects:
            line = f"- {o.label}: {o.bearing.name}, {o.distance_class}"
            if o.properties:
                line += f", {o.properties}"
            line += f", last seen step {o.last_seen_step}"
            physical_lines.append(line)
    parts.append(HEADER_PHYSICAL + "\n" + ("\n".join(physical_lines) or EMPTY_SENTINEL))

    parts.append(HEADER_ROBOT + "\n" + (memory.robot_state_text or EMPTY_SENTINEL))

    history = "\n".join(f"- {note}" for note in memory.history_notes)
    parts.append(HEADER_HISTORY + "\n" + (history or EMPTY_SENTINEL))

    parts.append(HEADER_TASK + "\n" + (memory.task_state_text or EMPTY_SENTINEL))
    return "\n".join(parts)


def parse_memory_sections(text: str) -> dict[str, str] | None:
    """Split free text into the four categories; None if headers are missing/misordered."""
    positions = []
    for header in MEMORY_HEADERS:
        idx = text.find(header)
        if idx < 0:
            return None
        positions.append(idx)
    if positions != sorted(positions):
        return None
    sections: dict[str, str] = {}
    for i, header in enumerate(MEMORY_HEADERS):
        start = positions[i] + len(header)
        end = positions[i + 1] if i + 1 < len(MEMORY_HEADERS) else len(text)
        sections[header] = text[start:end].strip()
    return sections


# --- reference curator ---

class ReferenceCurator:
    """Deterministic rewrite rules: merge, update bearings, dedupe, evict.

    Owned by one episode at a time; remembers the previously executed motion
    so fresh detections can be attributed to the move that revealed them.
    """

    def __init__(
        self,
        camera_facings: Mapping[str, Bearing],
        action_motions: Mapping[str, MotionEvent],
        objective: str = "",
    ):
        self.camera_facings = dict(camera_facings)
        self.action_motions = dict(action_motions)
        self.objective = objective
        self._prev_motion = MOTION_NONE
        self._prev_action = ""

    def curate(self, memory: EnvironmentMemory, record: StepRecord) -> tuple[EnvironmentMemory, list[str]]:
        motion = self.action_motions.get(record.action, MOTION_NONE)

        objects = [replace(o, bearing=update_bearing(o.bearing, motion)) for o in memory.objects]

        scene_answers: list[str] = []
        for camera_id, text in record.observations:
            if text.startswith("Yes:"):
                scene_answers.append(text)
            parsed = parse_visibility_answer(text)
            if parsed is None or camera_id not in self.camera_facings:
                continue
            label, frame_bearing, size = parsed
            seen_at = Bearing(
                (self.camera_facings[camera_id].sector + _FRAME_OFFSET[frame_bearing]) % 8
            )
            properties = f"apparent size {size}"
            is_new = all(o.label != label for o in objects)
            if is_new and self._prev_motion.kind != "none":
                pre_move = infer_position_from_detection(seen_at, self._prev_motion)
                properties += (
                    f"; entered view after {self._prev_action}"
                    f" (bore {pre_move.name} beforehand)"
                )
            entry = ObjectEntry(
                label=label,
                bearing=update_bearing(seen_at, motion),
                distance_class=_SIZE_TO_DISTANCE[size],
                properties=properties,
                last_seen_step=record.step,
            )
            # same label with a different estimate is a contradiction: keep the newer
            objects = [o for o in objects if o.label != label] + [entry]

        scene_text = "; ".join(scene_answers)[:240] if scene_answers else memory.scene_text

        notes = list(memory.history_notes)
        outcome_class = record.ack or "ok"
        last_for_action = next(
            (n for n in reversed(notes) if n.split(": ", 1)[-1].startswith(f"{record.action} ->")),
            None,
        )
        if last_for_action is None or not last_for_action.endswith(f"-> {outcome_class}"):
            notes.append(f"step {record.step}: {record.action} -> {outcome_class}")

        robot_state_text = _format_proprio(record.proprio)

        task_state_text = f"Objective: {self.objective}" if self.objective else ""
        status = f"Status: in progress ({record.step} steps taken)."
        task_state_text = (task_state_text + "\n" + status).strip()

        updated = EnvironmentMemory(
            scene_text=scene_text,
            objects=objects,
            robot_state_text=robot_state_text,
            history_notes=notes,
            task_state_text=task_state_text,
            size_budget=memory.size_budget,
        )
        _evict_to_budget(updated)

        self._prev_motion = motion
        self._prev_action = record.action
        return updated, []


def _format_proprio(proprio: Mapping) -> str:
    if not proprio:
        return ""
    lines: list[str] = []
    joints = proprio.get("joints") or {}
    if joints:
        rendered = ", ".join(f"{k}={joints[k]:g}" for k in sorted(joints))
        lines.append(f"Joints: {rendered}")
    pose = proprio.get("pose")
    if pose:
        x, y, heading = pose
        lines.append(f"Pose: x={x:g}, y={y:g}, heading={heading:g}")
    return "\n".join(lines)


def _evict_to_budget(memory: EnvironmentMemory) -> None:
    """Trim in place: oldest history first, then farthest-stale objects, then text."""
    budget = memory.size_budget
    while len(render_memory_text(memory)) > budget and memory.history_notes:
        memory.history_notes.pop(0)
    while len(render_memory_text(memory)) > budget and memory.objects:
        victim = min(
            memory.objects,
            key=lambda o: (_EVICT_RANK[o.distance_class], o.last_seen_step),
        )
        memory.objects.remove(victim)
    for attr in ("scene_text", "robot_state_text", "task_state_text"):
        while len(render_memory_text(memory)) > budget and getattr(memory, attr):
            setattr(memory, attr, getattr(memory, attr)[: len(getattr(memory, attr)) // 2].rstrip())


# --- LLM curator ---

CURATOR_SYSTEM = (
    "You maintain a robot's working memory. Rewrite the memory from scratch "
    "each time: merge duplicates, resolve contradictions in favor of newer "
    "information, and drop details that stopped mattering. Your whole reply "
    "must be the new memory, containing exactly these four section headers in "
    "this order: {headers}. Keep the total under {budget} characters."
)

CURATOR_REPROMPT = (
    "That reply did not follow the required layout. Reply again with exactly "
    "the four bracketed section headers {headers}, in order, and nothing else "
    "around them."
)


class LlmCurator:
    """Backend-driven rewriting with a deterministic safety net."""

    def __init__(self, backend: Backend, fallback: ReferenceCurator):
        self.backend = backend
        self.fallback = fallback

    def curate(self, memory: EnvironmentMemory, record: StepRecord) -> tuple[EnvironmentMemory, list[str]]:
        headers = " ".join(MEMORY_HEADERS)
        system = ChatMessage(
            "system", CURATOR_SYSTEM.format(headers=headers, budget=memory.size_budget)
        )
        observations = "\n".join(f"[{cam}] {text}" for cam, text in record.observations)
        user = ChatMessage(
            "user",
            "Current memory:\n"
            f"{render_memory_text(memory)}\n\n"
            f"Latest step {record.step}:\n"
            f"visual query: {record.query}\n"
            f"observations:\n{observations}\n"
            f"action: {record.action} -> {record.ack}\n\n"
            "Reply with the full rewritten memory.",
        )
        messages: list[ChatMessage] = [system, user]
        fallback_reason = ""
        for attempt in range(2):
            try:
                response = complete(messages, self.backend)
            except LangloopError as exc:
                fallback_reason = f"backend failure: {exc}"
                break
            sections = parse_memory_sections(response)
            if sections is not None:
                candidate = EnvironmentMemory(
                    scene_text=sections[HEADER_PHYSICAL],
                    objects=[],
                    robot_state_text=sections[HEADER_ROBOT],
                    history_notes=[
                        line.lstrip("- ").strip()
                        for line in sections[HEADER_HISTORY].splitlines()
                        if line.strip()
                    ],
                    task_state_text=sections[HEADER_TASK],
                    size_budget=memory.size_budget,
                )
                if len(render_memory_text(candidate)) <= memory.size_budget:
                    return candidate, []
                fallback_reason = "curated memory exceeded budget"
                break
            if attempt == 0:
                messages = messages + [
                    ChatMessage("assistant", response),
                    ChatMessage("user", CURATOR_REPROMPT.format(headers=headers)),
                ]
                fallback_reason = "curator reply missing required sections"
        fallback_memory, _ = self.fallback.curate(memory, record)
        return fallback_memory, [f"curator_fallback: {fallback_reason}"]
