"""Per-camera perception: query-conditioned scene answers.

Two routes produce an observation for a camera frame. Raster frames go to
a vision-capable backend (optionally cropped, and upscaled first when the
camera is low-resolution). Symbolic frames are answered by a deterministic
oracle whose fixed answer templates downstream components can parse.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Sequence

from PIL import Image

from .backends import Backend, ChatMessage, complete
from .errors import InvalidTarget

FRAME_BEARINGS = ("left", "center", "right")
APPARENT_SIZES = ("small", "medium", "large")


@dataclass(frozen=True)
class Raster:
    width: int
    height: int
    png_bytes: bytes

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("raster dimensions must be positive")


@dataclass(frozen=True)
class SceneEntity:
    label: str
    bearing_in_frame: str
    apparent_size: str
    occluded: bool = False

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("scene entity label must be non-empty")
        if self.bearing_in_frame not in FRAME_BEARINGS:
            raise ValueError(f"bearing_in_frame must be one of {FRAME_BEARINGS}")
        if self.apparent_size not in APPARENT_SIZES:
            raise ValueError(f"apparent_size must be one of {APPARENT_SIZES}")


@dataclass(frozen=True)
class CameraFrame:
    camera_id: str
    timestamp: int
    raster: Raster | None = None
    scene: tuple[SceneEntity, ...] | None = None

    def __post_init__(self) -> None:
        if (self.raster is None) == (self.scene is None):
            raise ValueError("exactly one of raster/scene must be populated")


@dataclass(frozen=True)
class MonitorObservation:
    camera_id: str
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("observation text must be non-empty")


# --- raster pipeline ---

def _decode(raster: Raster) -> Image.Image:
    return Image.open(io.BytesIO(raster.png_bytes))


def _encode(img: Image.Image) -> Raster:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return Raster(img.width, img.height, buf.getvalue())


def png_raster(img: Image.Image) -> Raster:
    return _encode(img)


def upscale(raster: Raster, target: tuple[int, int]) -> Raster:
    """Resample a raster up to ``target`` (width, height) via bilinear interpolation."""
    tw, th = target
    if tw < raster.width or th < raster.height:
        raise InvalidTarget(
            f"target {tw}x{th} smaller than source {raster.width}x{raster.height}"
        )
    img = _decode(raster).resize((tw, th), Image.Resampling.BILINEAR)
    return _encode(img)


@dataclass(frozen=True)
class CropRect:
    left: int
    top: int
    width: int
    height: int


@dataclass
class MonitorSettings:
    """Raster preprocessing knobs; all per-deployment config, not code."""

    upscale_threshold: int = 512  # frames with min dimension below this get upscaled
    upscale_target: tuple[int, int] = (768, 768)
    crops: dict[str, CropRect] = field(default_factory=dict)
    system_text: str = (
        "You are a camera monitor for a robot. Answer the operator's question "
        "about the attached camera image concisely, in plain language."
    )


def prepare_frame(raster: Raster, camera_id: str, settings: MonitorSettings) -> tuple[Raster, list[str]]:
    """Apply the configured crop and conditional upscale; returns (raster, applied steps)."""
    applied: list[str] = []
    crop = settings.crops.get(camera_id)
    if crop is not None:
        img = _decode(raster).crop(
            (crop.left, crop.top, crop.left + crop.width, crop.top + crop.height)
        )
        raster = _encode(img)
        applied.append("crop")
    if min(raster.width, raster.height) < settings.upscale_threshold:
        raster = upscale(raster, settings.upscale_target)
        applied.append("upscale")
    return raster, applied


def describe_scene(
    frame: CameraFrame,
    query_text: str,
    backend: Backend,
    settings: MonitorSettings | None = None,
) -> MonitorObservation:
    """Ask a vision backend the query about one raster frame."""
    if frame.raster is None:
        raise ValueError("describe_scene requires a raster frame")
    settings = settings or MonitorSettings()
    raster, _ = prepare_frame(frame.raster, frame.camera_id, settings)
    messages = [
        ChatMessage("system", f"{settings.system_text} Camera: {frame.camera_id}."),
        ChatMessage("user", query_text, images=(raster.png_bytes,)),
    ]
    text = complete(messages, backend)
    return MonitorObservation(frame.camera_id, text)


# --- symbolic oracle ---

VISIBLE_TEMPLATE = "Yes: {label} visible, {bearing} of frame, {size}."
NOTHING_TEMPLATE = "No: nothing visible."
NOT_VISIBLE_TEMPLATE = "No: the queried entity is not visible. Visible: {others}."

_VISIBLE_RE = re.compile(
    r"Yes: (?P<label>.+) visible, (?P<bearing>left|center|right) of frame, "
    r"(?P<size>small|medium|large)\."
)


def parse_visibility_answer(text: str) -> tuple[str, str, str] | None:
    """Extract (label, bearing, size) from an oracle-template answer, if present."""
    m = _VISIBLE_RE.search(text)
    if m is None:
        return None
    return m.group("label"), m.group("bearing"), m.group("size")


def oracle_describe(frame: CameraFrame, query_text: str) -> MonitorObservation:
    """Deterministic answer over a symbolic scene, conditioned on the query text."""
    if frame.scene is None:
        raise ValueError("oracle_describe requires a symbolic frame")
    query = query_text.lower()
    visible = [e for e in frame.scene if not e.occluded]
    matched = next((e for e in visible if e.label.lower() in query), None)
    if matched is not None:
        text = VISIBLE_TEMPLATE.format(
            label=matched.label, bearing=matched.bearing_in_frame, size=matched.apparent_size
        )
    elif not visible:
        text = NOTHING_TEMPLATE
    else:
        others = "; ".join(
            f"{e.label} ({e.bearing_in_frame} of frame, {e.apparent_size})" for e in visible
        )
        text = NOT_VISIBLE_TEMPLATE.format(others=others)
    return MonitorObservation(frame.camera_id, text)


def observe_frame(
    frame: CameraFrame,
    query_text: str,
    backend: Backend | None,
    settings: MonitorSettings | None = None,
) -> MonitorObservation:
    """Route one frame to the oracle (symbolic) or the vision backend (raster)."""
    if frame.scene is not None:
        return oracle_describe(frame, query_text)
    if backend is None:
        raise ValueError(f"raster frame from {frame.camera_id} needs a vision backend")
    return describe_scene(frame, query_text, backend, settings)


def observe_all(
    frames: Sequence[CameraFrame],
    query_text: str,
    backend: Backend | None,
    settings: MonitorSettings | None = None,
    max_workers: int = 4,
) -> list[MonitorObservation]:
    """One observation per frame, in frame order.

    Raster frames may be described concurrently (each call is independent);
    symbolic frames are answered inline.
    """
    rasters = [f for f in frames if f.raster is not None]
    if len(rasters) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {
                f.camera_id: pool.submit(observe_frame, f, query_text, backend, settings)
                for f in rasters
            }
            by_id = {cam: fut.result() for cam, fut in futures.items()}
        return [
            by_id[f.camera_id] if f.raster is not None else observe_frame(f, query_text, backend, settings)
            for f in frames
        ]
    return [observe_frame(f, query_text, backend, settings) for f in frames]
