"""Model-to-pixel correspondence sets and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .engine import SolverError

PIXEL_BOUND_TOL = 0.10  # fraction of image size a pixel may sit outside


@dataclass(frozen=True)
class CorrespondenceItem:
    frame_id: int
    p_model: np.ndarray  # (3,) point on the CAD surface
    q_pixel: np.ndarray  # (2,)

    def __post_init__(self):
        object.__setattr__(self, "p_model", np.asarray(self.p_model, dtype=np.float64).reshape(3))
        object.__setattr__(self, "q_pixel", np.asarray(self.q_pixel, dtype=np.float64).reshape(2))


@dataclass(frozen=True)
class CorrespondenceSet:
    track_id: str
    model_id: str
    items: tuple[CorrespondenceItem, ...]
    flipped: bool = False  # model mirrored across its x=0 plane before posing

    def __post_init__(self):
        if not self.items:
            raise SolverError("correspondence set must contain at least one item")
        object.__setattr__(self, "items", tuple(self.items))

    def frames(self) -> list[int]:
        return sorted({it.frame_id for it in self.items})

    def as_tuples(self):
        return [(it.frame_id, it.p_model, it.q_pixel) for it in self.items]

    def model_points(self) -> np.ndarray:
        return np.stack([it.p_model for it in self.items])


def validate_correspondences(corr: CorrespondenceSet, cams: dict) -> None:
    """Check camera coverage and that pixels sit near the image bounds.

    Pixels may fall up to PIXEL_BOUND_TOL of the image size outside the
    frame (annotations on partly truncated objects), anything further is
    rejected as a coordinate mixup.
    """
    missing = sorted({it.frame_id for it in corr.items} - set(cams))
    if missing:
        raise SolverError(f"no camera for frames {missing}")
    for it in corr.items:
        cam = cams[it.frame_id]
        w, h = cam.image_size
        u, v = it.q_pixel
        if not (-PIXEL_BOUND_TOL * w <= u <= (1 + PIXEL_BOUND_TOL) * w
                and -PIXEL_BOUND_TOL * h <= v <= (1 + PIXEL_BOUND_TOL) * h):
            raise SolverError(
                f"pixel {tuple(it.q_pixel)} in frame {it.frame_id} lies more than "
                f"{PIXEL_BOUND_TOL:.0%} outside the {w}x{h} image"
            )


def dump_correspondences_json(corr: CorrespondenceSet) -> str:
    return json.dumps(
        {
            "track_id": corr.track_id,
            "model_id": corr.model_id,
            "flipped": corr.flipped,
            "items": [
                {
                    "frame_id": it.frame_id,
                    "p_model": [float(x) for x in it.p_model],
                    "q_pixel": [float(x) for x in it.q_pixel],
                }
                for it in corr.items
            ],
        },
        indent=2,
        sort_keys=True,
    )


def load_correspondences_json(text: str) -> CorrespondenceSet:
    try:
        data = json.loads(text)
        items = tuple(
            CorrespondenceItem(
                frame_id=int(it["frame_id"]),
                p_model=np.array(it["p_model"], dtype=np.float64),
                q_pixel=np.array(it["q_pixel"], dtype=np.float64),
            )
            for it in data["items"]
        )
        return CorrespondenceSet(
            track_id=str(data["track_id"]),
            model_id=str(data["model_id"]),
            items=items,
            flipped=bool(data.get("flipped", False)),
        )
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise SolverError(f"bad correspondence JSON: {exc}") from exc
