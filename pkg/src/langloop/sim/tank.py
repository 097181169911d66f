"""Submersible world: 3D cell lattice, 45-degree yaw, surge/heave/yaw moves."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import ProprioState
from ..monitor import CameraFrame, SceneEntity
from .base import CameraSpec, FACING_DEGREES, frame_bearing, relative_angle, size_band


@dataclass(frozen=True)
class TankEntity:
    label: str
    x: int
    y: int
    z: int


class TankWorld:
    """Thruster vehicle in an nx x ny x nz water volume; yaw in 45-degree steps."""

    def __init__(
        self,
        nx: int,
        ny: int,
        nz: int,
        start: tuple[int, int, int, int],
        target: TankEntity,
        cameras: list[CameraSpec],
        extra_entities: tuple[TankEntity, ...] = (),
        success_radius_cells: float = 1.5,
    ):
        if min(nx, ny, nz) <= 0:
            raise ValueError("tank dimensions must be positive")
        if start[3] % 45 != 0:
            raise ValueError("yaw must be a multiple of 45 degrees")
        self.nx, self.ny, self.nz = nx, ny, nz
        self.target = target
        self.extra_entities = extra_entities
        self.success_radius_cells = success_radius_cells
        self.cameras = cameras
        self._start = start
        self.x, self.y, self.z, self.yaw = start
        self._tick = 0

    def reset(self, seed: int) -> None:
        self.x, self.y, self.z, self.yaw = self._start
        self._tick = 0

    def supported_actions(self) -> frozenset[str]:
        return frozenset(
            {"surge_forward", "surge_backward", "yaw_left", "yaw_right", "heave_up", "heave_down"}
        )

    def dispatch(self, action: str, params: dict[str, float]) -> str:
        if action == "yaw_left":
            self.yaw = (self.yaw - 45) % 360
            return "ok"
        if action == "yaw_right":
            self.yaw = (self.yaw + 45) % 360
            return "ok"
        if action in ("heave_up", "heave_down"):
            nz = self.z + (1 if action == "heave_up" else -1)
            if not 0 <= nz < self.nz:
                return "blocked"
            self.z = nz
            return "ok"
        rad = math.radians(self.yaw)
        dx, dy = round(math.sin(rad)), round(math.cos(rad))
        if action == "surge_backward":
            dx, dy = -dx, -dy
        nx, ny = self.x + dx, self.y + dy
        if not (0 <= nx < self.nx and 0 <= ny < self.ny):
            return "blocked"
        self.x, self.y = nx, ny
        return "ok"

    def sense(self) -> list[CameraFrame]:
        self._tick += 1
        frames = []
        for cam in self.cameras:
            if not cam.enabled:
                continue
            frames.append(CameraFrame(cam.camera_id, self._tick, scene=tuple(self._visible(cam))))
        return frames

    def _visible(self, cam: CameraSpec):
        direction = self.yaw + FACING_DEGREES[cam.facing]
        for entity in (self.target, *self.extra_entities):
            dx, dy, dz = entity.x - self.x, entity.y - self.y, entity.z - self.z
            horizontal = math.hypot(dx, dy)
            if abs(dz) > cam.vertical_range or horizontal > cam.view_distance:
                continue
            if horizontal == 0:
                yield SceneEntity(entity.label, "center", "large")
                continue
            rel = relative_angle(dx, dy, direction)
            if abs(rel) > cam.fov_deg / 2.0 + 1e-9:
                continue
            yield SceneEntity(
                entity.label, frame_bearing(rel, cam.fov_deg), size_band(horizontal, cam.view_distance)
            )

    def proprio(self) -> ProprioState:
        return ProprioState(
            joint_displacements={"heave": float(self.z - self._start[2])},
            pose_estimate=(float(self.x), float(self.y), float(self.yaw)),
        )

    def success(self) -> bool:
        dist = math.sqrt(
            (self.target.x - self.x) ** 2
            + (self.target.y - self.y) ** 2
            + (self.target.z - self.z) ** 2
        )
        return dist <= self.success_radius_cells

    def snapshot(self):
        return (self.x, self.y, self.z, self.yaw)

    def restore(self, state) -> None:
        self.x, self.y, self.z, self.yaw = state
