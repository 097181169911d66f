"""Scenario files: world layout, entity placement, camera setup as data.

One JSON file fully describes a simulated environment. The ``kind`` field
selects the world builder from a single registry; nothing downstream of the
loader branches on embodiment.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

from ..errors import MissingFile, SchemaViolation
from .base import CameraSpec, SearchableAdapter
from .grid import GridEntity, GridWorld
from .limb import LimbEntity, LimbWorld, VisibilityRegion
from .tank import TankEntity, TankWorld


def _cameras(raw: list[dict]) -> list[CameraSpec]:
    specs = []
    for cam in raw:
        specs.append(
            CameraSpec(
                camera_id=cam["id"],
                facing=cam.get("facing", "front"),
                fov_deg=float(cam.get("fov_deg", 90.0)),
                view_distance=float(cam.get("view_distance", 8.0)),
                vertical_range=float(cam.get("vertical_range", 1.0)),
                enabled=bool(cam.get("enabled", True)),
            )
        )
    return specs


def _build_grid(doc: dict) -> GridWorld:
    robot = doc["robot"]
    target = doc["target"]
    return GridWorld(
        width=int(doc["width"]),
        height=int(doc["height"]),
        cell_size_m=float(doc.get("cell_size_m", 0.5)),
        start=(int(robot["x"]), int(robot["y"]), int(robot["heading"])),
        target=GridEntity(target["label"], int(target["x"]), int(target["y"])),
        cameras=_cameras(doc.get("cameras", [])),
        obstacles=frozenset((int(x), int(y)) for x, y in doc.get("obstacles", [])),
        extra_entities=tuple(
            GridEntity(e["label"], int(e["x"]), int(e["y"])) for e in doc.get("entities", [])
        ),
        success_radius_m=float(doc.get("success_radius_m", 1.0)),
    )


def _build_limb(doc: dict) -> LimbWorld:
    entities = []
    for e in doc.get("entities", []):
        regions = []
        for r in e.get("visible_from", []):
            ranges = tuple(
                (joint, int(bounds[0]), int(bounds[1]))
                for joint, bounds in r.items()
                if joint not in ("camera", "bearing", "size")
            )
            regions.append(
                VisibilityRegion(
                    camera_id=r["camera"],
                    joint_ranges=ranges,
                    bearing=r.get("bearing", "center"),
                    size=r.get("size", "medium"),
                )
            )
        entities.append(LimbEntity(e["label"], tuple(regions)))
    return LimbWorld(
        joint_ranges={k: (int(v[0]), int(v[1])) for k, v in doc["joint_ranges"].items()},
        joint_moves={k: (v[0], int(v[1])) for k, v in doc["joint_moves"].items()},
        reset_action=doc["reset_action"],
        cameras=[(c["id"], bool(c.get("enabled", True))) for c in doc.get("cameras", [])],
        entities=tuple(entities),
        target_label=doc["target_label"],
    )


def _build_tank(doc: dict) -> TankWorld:
    robot = doc["robot"]
    target = doc["target"]
    return TankWorld(
        nx=int(doc["nx"]),
        ny=int(doc["ny"]),
        nz=int(doc["nz"]),
        start=(int(robot["x"]), int(robot["y"]), int(robot["z"]), int(robot["yaw"])),
        target=TankEntity(target["label"], int(target["x"]), int(target["y"]), int(target["z"])),
        cameras=_cameras(doc.get("cameras", [])),
        extra_entities=tuple(
            TankEntity(e["label"], int(e["x"]), int(e["y"]), int(e["z"]))
            for e in doc.get("entities", [])
        ),
        success_radius_cells=float(doc.get("success_radius_cells", 1.5)),
    )


WORLD_BUILDERS: dict[str, Callable[[dict], SearchableAdapter]] = {
    "grid": _build_grid,
    "limb": _build_limb,
    "tank": _build_tank,
}


def load_scenario(path: str | Path) -> SearchableAdapter:
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"scenario file not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaViolation(f"scenario file is not valid JSON: {exc}") from exc
    kind = doc.get("kind")
    if kind not in WORLD_BUILDERS:
        raise SchemaViolation(
            f"scenario kind {kind!r} not in registry {sorted(WORLD_BUILDERS)}"
        )
    try:
        return WORLD_BUILDERS[kind](doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"scenario file invalid for kind {kind!r}: {exc}") from exc
