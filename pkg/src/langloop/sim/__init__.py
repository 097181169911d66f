"""Simulated embodiments behind the shared adapter contract."""

from .base import (
    CameraSpec,
    RobotAdapter,
    SearchableAdapter,
    min_steps_oracle,
    random_policy_step,
)
from .grid import GridEntity, GridWorld
from .limb import LimbEntity, LimbWorld, VisibilityRegion
from .scenario import WORLD_BUILDERS, load_scenario
from .tank import TankEntity, TankWorld

__all__ = [
    "CameraSpec",
    "GridEntity",
    "GridWorld",
    "LimbEntity",
    "LimbWorld",
    "RobotAdapter",
    "SearchableAdapter",
    "TankEntity",
    "TankWorld",
    "VisibilityRegion",
    "WORLD_BUILDERS",
    "load_scenario",
    "min_steps_oracle",
    "random_policy_step",
]
