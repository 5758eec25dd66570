"""Scene records and their canonical JSON form.

A scene is an ordered list of calibrated frames, each pairing a
CameraFrame with the path of its extracted image. The JSON writer is
canonical (sorted keys, fixed layout), so save(load(save(x))) is
byte-identical and files can be diffed and content-addressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..geometry import CameraFrame, GeometryError

SPLITS = ("train", "val", "test")


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SceneFrame:
    camera: CameraFrame
    image: str  # path of the extracted frame, relative to the data dir


@dataclass(frozen=True)
class Scene:
    scene_id: str
    frames: tuple[SceneFrame, ...]
    world_up: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        up = np.asarray(self.world_up, dtype=np.float64).reshape(3)
        n = np.linalg.norm(up)
        if abs(n - 1.0) > 1e-6:
            raise SceneError("world_up must be unit length")
        object.__setattr__(self, "world_up", up)
        if not self.scene_id:
            raise SceneError("scene_id must be non-empty")
        if self.split not in SPLITS:
            raise SceneError(f"split must be one of {SPLITS}, got {self.split!r}")
        if len(self.frames) < 2:
            raise SceneError(f"scene needs at least 2 frames, got {len(self.frames)}")
        ts = [f.camera.timestamp for f in self.frames]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise SceneError("frames must be ordered by timestamp")
        ids = [f.camera.frame_id for f in self.frames]
        if len(set(ids)) != len(ids):
            raise SceneError("frame_ids must be unique")

    def cameras(self) -> dict[int, CameraFrame]:
        return {f.camera.frame_id: f.camera for f in self.frames}

    def frame(self, frame_id: int) -> SceneFrame:
        for f in self.frames:
            if f.camera.frame_id == frame_id:
                return f
        raise SceneError(f"scene {self.scene_id} has no frame {frame_id}")


def save_scene(scene: Scene) -> str:
    """Canonical JSON text for a scene."""
    doc = {
        "scene_id": scene.scene_id,
        "split": scene.split,
        "world_up": [float(x) for x in scene.world_up],
        "frames": [
            {
                "frame_id": f.camera.frame_id,
                "timestamp": f.camera.timestamp,
                "intrinsics": [float(x) for x in f.camera.intrinsics],
                "extrinsics": [float(x) for x in f.camera.extrinsics.reshape(-1)],
                "image_size": [int(v) for v in f.camera.image_size],
                "image": f.image,
            }
            for f in scene.frames
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def _field(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SceneError(f"{path}.{key}: missing")
    v = doc[key]
    if kind is not None and not isinstance(v, kind):
        raise SceneError(f"{path}.{key}: expected {kind.__name__}, got {type(v).__name__}")
    return v


def load_scene(text: str) -> Scene:
    """Parse scene JSON, reporting schema violations with a field path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene JSON does not parse: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneError("$: expected an object")
    scene_id = _field(doc, "scene_id", str, "$")
    split = _field(doc, "split", str, "$")
    world_up = _field(doc, "world_up", list, "$")
    raw_frames = _field(doc, "frames", list, "$")
    frames = []
    for i, fr in enumerate(raw_frames):
        path = f"$.frames[{i}]"
        if not isinstance(fr, dict):
            raise SceneError(f"{path}: expected an object")
        frame_id = _field(fr, "frame_id", int, path)
        intr = _field(fr, "intrinsics", list, path)
        extr = _field(fr, "extrinsics", list, path)
        size = _field(fr, "image_size", list, path)
        image = _field(fr, "image", str, path)
        ts = fr.get("timestamp", 0)
        if len(intr) != 4:
            raise SceneError(f"{path}.intrinsics: expected 4 values, got {len(intr)}")
        if len(extr) != 12:
            raise SceneError(f"{path}.extrinsics: expected 12 row-major values, got {len(extr)}")
        if len(size) != 2:
            raise SceneError(f"{path}.image_size: expected [width, height]")
        try:
            cam = CameraFrame(
                frame_id=frame_id,
                intrinsics=tuple(float(x) for x in intr),
                extrinsics=np.array(extr, dtype=np.float64).reshape(3, 4),
                image_size=(int(size[0]), int(size[1])),
                timestamp=int(ts),
            )
        except (GeometryError, ValueError, TypeError) as exc:
            raise SceneError(f"{path}: {exc}") from exc
        frames.append(SceneFrame(camera=cam, image=image))
    try:
        return Scene(scene_id=scene_id, frames=tuple(frames),
                     world_up=np.asarray(world_up, dtype=np.float64), split=split)
    except (SceneError, ValueError) as exc:
        raise SceneError(f"$: {exc}") from exc
