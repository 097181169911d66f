"""Adapter contract and embodiment-independent machinery.

Every robot, simulated or real, sits behind the same five-method surface:
reset / dispatch / sense / proprio / success. Simulated adapters also
expose snapshot / restore over a finite state, which lets a breadth-first
search compute the exact minimum number of actions to success.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Protocol, Sequence

from ..config import ActionInterface, ActionDef, ProprioState
from ..errors import Unreachable
from ..monitor import CameraFrame


class RobotAdapter(Protocol):
    def reset(self, seed: int) -> None: ...

    def dispatch(self, action: str, params: dict[str, float]) -> str: ...

    def sense(self) -> list[CameraFrame]: ...

    def proprio(self) -> ProprioState: ...

    def success(self) -> bool: ...

    def supported_actions(self) -> frozenset[str]: ...


class SearchableAdapter(RobotAdapter, Protocol):
    def snapshot(self) -> Hashable: ...

    def restore(self, state: Hashable) -> None: ...


@dataclass(frozen=True)
class CameraSpec:
    camera_id: str
    facing: str = "front"
    fov_deg: float = 90.0
    view_distance: float = 8.0
    vertical_range: float = 1.0
    enabled: bool = True


FACING_DEGREES = {
    "front": 0.0,
    "front-right": 45.0,
    "right": 90.0,
    "back-right": 135.0,
    "back": 180.0,
    "back-left": 225.0,
    "left": 270.0,
    "front-left": 315.0,
}


def norm180(deg: float) -> float:
    """Wrap an angle to (-180, 180]."""
    wrapped = deg % 360.0
    return wrapped - 360.0 if wrapped > 180.0 else wrapped


def relative_angle(dx: float, dy: float, direction_deg: float) -> float:
    """Clockwise angle from ``direction_deg`` to the vector (dx, dy), y = ahead at 0 deg."""
    return norm180(math.degrees(math.atan2(dx, dy)) - direction_deg)


def frame_bearing(rel_deg: float, fov_deg: float) -> str:
    if abs(rel_deg) <= fov_deg / 6.0:
        return "center"
    return "left" if rel_deg < 0 else "right"


def size_band(distance: float, view_distance: float) -> str:
    if distance <= view_distance / 3.0:
        return "large"
    if distance <= 2.0 * view_distance / 3.0:
        return "medium"
    return "small"


def min_steps_oracle(adapter: SearchableAdapter, action_names: Sequence[str]) -> int:
    """Length of the shortest action sequence reaching success, by BFS.

    Explores the adapter's own dynamics via snapshot/restore, so it is exact
    for any finite discrete state space. The adapter is left in its starting
    state afterwards.
    """
    start = adapter.snapshot()
    try:
        if adapter.success():
            return 0
        visited: set[Hashable] = {start}
        frontier: list[Hashable] = [start]
        depth = 0
        while frontier:
            depth += 1
            next_frontier: list[Hashable] = []
            for state in frontier:
                for name in action_names:
                    adapter.restore(state)
                    adapter.dispatch(name, {})
                    successor = adapter.snapshot()
                    if successor in visited:
                        continue
                    visited.add(successor)
                    if adapter.success():
                        return depth
                    next_frontier.append(successor)
            frontier = next_frontier
        raise Unreachable(f"no success state reachable within {len(visited)} states")
    finally:
        adapter.restore(start)


def random_policy_step(interface: ActionInterface, rng) -> ActionDef:
    """Uniform draw over the admissible actions."""
    return interface.actions[rng.randrange(interface.action_count)]
