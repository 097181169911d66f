"""Planar warehouse world: cell lattice, four-way driving, cone cameras."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import ProprioState
from ..monitor import CameraFrame, SceneEntity
from .base import CameraSpec, FACING_DEGREES, frame_bearing, relative_angle, size_band

HEADINGS = (0, 90, 180, 270)  # clockwise from +y

_HEADING_STEP = {0: (0, 1), 90: (1, 0), 180: (0, -1), 270: (-1, 0)}


@dataclass(frozen=True)
class GridEntity:
    label: str
    x: int
    y: int


class GridWorld:
    """Wheeled robot on a width x height cell grid; 90-degree headings."""

    def __init__(
        self,
        width: int,
        height: int,
        cell_size_m: float,
        start: tuple[int, int, int],
        target: GridEntity,
        cameras: list[CameraSpec],
        obstacles: frozenset[tuple[int, int]] = frozenset(),
        extra_entities: tuple[GridEntity, ...] = (),
        success_radius_m: float = 1.0,
    ):
        if width <= 0 or height <= 0:
            raise ValueError("grid dimensions must be positive")
        if start[2] not in HEADINGS:
            raise ValueError(f"heading must be one of {HEADINGS}")
        if (start[0], start[1]) in obstacles or (target.x, target.y) in obstacles:
            raise ValueError("robot and target must be on free cells")
        self.width = width
        self.height = height
        self.cell_size_m = cell_size_m
        self.obstacles = obstacles
        self.target = target
        self.extra_entities = extra_entities
        self.success_radius_m = success_radius_m
        self.cameras = cameras
        self._start = start
        self.x, self.y, self.heading = start
        self._tick = 0

    # -- adapter surface --

    def reset(self, seed: int) -> None:
        self.x, self.y, self.heading = self._start
        self._tick = 0

    def supported_actions(self) -> frozenset[str]:
        return frozenset({"forward", "backward", "rotate_left", "rotate_right"})

    def dispatch(self, action: str, params: dict[str, float]) -> str:
        if action == "rotate_left":
            self.heading = (self.heading - 90) % 360
            return "ok"
        if action == "rotate_right":
            self.heading = (self.heading + 90) % 360
            return "ok"
        dx, dy = _HEADING_STEP[self.heading]
        if action == "backward":
            dx, dy = -dx, -dy
        nx, ny = self.x + dx, self.y + dy
        if not (0 <= nx < self.width and 0 <= ny < self.height) or (nx, ny) in self.obstacles:
            return "blocked"
        self.x, self.y = nx, ny
        return "ok"

    def sense(self) -> list[CameraFrame]:
        self._tick += 1
        frames = []
        for cam in self.cameras:
            if not cam.enabled:
                continue
            frames.append(
                CameraFrame(cam.camera_id, self._tick, scene=tuple(self._visible(cam)))
            )
        return frames

    def proprio(self) -> ProprioState:
        return ProprioState(
            joint_displacements={},
            pose_estimate=(self.x * self.cell_size_m, self.y * self.cell_size_m, float(self.heading)),
        )

    def success(self) -> bool:
        dist = math.hypot(self.target.x - self.x, self.target.y - self.y) * self.cell_size_m
        return dist <= self.success_radius_m

    def snapshot(self):
        return (self.x, self.y, self.heading)

    def restore(self, state) -> None:
        self.x, self.y, self.heading = state

    # -- geometry --

    def _visible(self, cam: CameraSpec):
        direction = self.heading + FACING_DEGREES[cam.facing]
        for entity in (self.target, *self.extra_entities):
            dx, dy = entity.x - self.x, entity.y - self.y
            dist = math.hypot(dx, dy)
            if dist == 0:
                yield SceneEntity(entity.label, "center", "large")
                continue
            if dist > cam.view_distance:
                continue
            rel = relative_angle(dx, dy, direction)
            if abs(rel) > cam.fov_deg / 2.0 + 1e-9:
                continue
            yield SceneEntity(
                entity.label,
                frame_bearing(rel, cam.fov_deg),
                size_band(dist, cam.view_distance),
                occluded=self._blocked_line((self.x, self.y), (entity.x, entity.y)),
            )

    def _blocked_line(self, a: tuple[int, int], b: tuple[int, int]) -> bool:
        """True when an obstacle cell lies strictly between a and b."""
        steps = max(abs(b[0] - a[0]), abs(b[1] - a[1])) * 4
        for i in range(1, steps):
            t = i / steps
            cell = (round(a[0] + (b[0] - a[0]) * t), round(a[1] + (b[1] - a[1]) * t))
            if cell not in (a, b) and cell in self.obstacles:
                return True
        return False
