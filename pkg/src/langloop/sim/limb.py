"""Multi-jointed limb world: bounded integer joint lattice, lookup visibility.

Cameras ride the limb, so what each one sees is a function of the joint
configuration. Entities declare visibility regions (a joint-range box per
camera) in the scenario file; an entity appears in a camera's frame exactly
when the current configuration falls inside one of its regions.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..config import ProprioState
from ..monitor import CameraFrame, SceneEntity


@dataclass(frozen=True)
class VisibilityRegion:
    camera_id: str
    joint_ranges: tuple[tuple[str, int, int], ...]  # (joint, lo, hi); absent joint = any
    bearing: str = "center"
    size: str = "medium"

    def contains(self, joints: dict[str, int]) -> bool:
        return all(lo <= joints[name] <= hi for name, lo, hi in self.joint_ranges)


@dataclass(frozen=True)
class LimbEntity:
    label: str
    regions: tuple[VisibilityRegion, ...]


class LimbWorld:
    def __init__(
        self,
        joint_ranges: dict[str, tuple[int, int]],
        joint_moves: dict[str, tuple[str, int]],
        reset_action: str,
        cameras: list[tuple[str, bool]],  # (camera_id, enabled)
        entities: tuple[LimbEntity, ...],
        target_label: str,
    ):
        for name, (lo, hi) in joint_ranges.items():
            if not lo <= 0 <= hi:
                raise ValueError(f"joint {name!r} range must contain the reset position 0")
        for action, (joint, delta) in joint_moves.items():
            if joint not in joint_ranges:
                raise ValueError(f"action {action!r} moves undeclared joint {joint!r}")
            if delta == 0:
                raise ValueError(f"action {action!r} has zero displacement")
        self.joint_ranges = dict(joint_ranges)
        self.joint_moves = dict(joint_moves)
        self.reset_action = reset_action
        self.cameras = list(cameras)
        self.entities = entities
        self.target_label = target_label
        self.joints = {name: 0 for name in joint_ranges}
        self._tick = 0

    def reset(self, seed: int) -> None:
        self.joints = {name: 0 for name in self.joint_ranges}
        self._tick = 0

    def supported_actions(self) -> frozenset[str]:
        return frozenset(self.joint_moves) | {self.reset_action}

    def dispatch(self, action: str, params: dict[str, float]) -> str:
        if action == self.reset_action:
            self.joints = {name: 0 for name in self.joint_ranges}
            return "ok"
        joint, delta = self.joint_moves[action]
        lo, hi = self.joint_ranges[joint]
        moved = min(max(self.joints[joint] + delta, lo), hi)
        if moved == self.joints[joint]:
            return "limit"
        self.joints[joint] = moved
        return "ok"

    def _entities_in(self, camera_id: str):
        for entity in self.entities:
            for region in entity.regions:
                if region.camera_id == camera_id and region.contains(self.joints):
                    yield SceneEntity(entity.label, region.bearing, region.size)
                    break

    def sense(self) -> list[CameraFrame]:
        self._tick += 1
        return [
            CameraFrame(cam_id, self._tick, scene=tuple(self._entities_in(cam_id)))
            for cam_id, enabled in self.cameras
            if enabled
        ]

    def proprio(self) -> ProprioState:
        return ProprioState(
            joint_displacements={k: float(v) for k, v in self.joints.items()},
            pose_estimate=None,
        )

    def success(self) -> bool:
        return any(
            any(e.label == self.target_label for e in self._entities_in(cam_id))
            for cam_id, enabled in self.cameras
            if enabled
        )

    def snapshot(self):
        return tuple(sorted(self.joints.items()))

    def restore(self, state) -> None:
        self.joints = dict(state)
