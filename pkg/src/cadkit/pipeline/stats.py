"""Per-scene annotation statistics.

Definitions are pinned here so reported numbers are reproducible:
an object counts as present in a frame when its track has a box there,
depth range is the max/min ratio of posed-centroid camera depths per
frame averaged over frames, and the truncation histogram bins each
posed object's mean truncation fraction into 10 bins over [0, 1).
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

import numpy as np

from ..geometry import Pose9DoF, apply_pose, camera_depth
from ..mesh import TriangleMesh, truncation_fraction
from ..tracking import Track
from .scene_io import Scene

N_TRUNCATION_BINS = 10


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class SceneStats:
    objects_per_frame: float
    mean_bbox_area_fraction: float
    z_dynamic_range: float
    truncation_histogram: tuple[int, ...]  # N_TRUNCATION_BINS bins over [0, 1)

    def __post_init__(self):
        if len(self.truncation_histogram) != N_TRUNCATION_BINS:
            raise StatsError(f"histogram must have {N_TRUNCATION_BINS} bins")
        if (self.objects_per_frame < 0 or self.mean_bbox_area_fraction < 0
                or self.z_dynamic_range < 0 or any(b < 0 for b in self.truncation_histogram)):
            raise StatsError("statistics must be non-negative")


def compute_scene_stats(
    scene: Scene,
    tracks: list[Track],
    poses: dict[str, Pose9DoF],
    meshes: dict[str, TriangleMesh],
    truncation_samples: int = 400,
) -> SceneStats:
    """Aggregate a scene's annotation statistics.

    poses and meshes map track_id to the solved pose and chosen model.
    Only tracks present in both contribute to the depth and truncation
    statistics; box statistics use every track.
    """
    posed = [t for t in tracks if t.track_id in poses and t.track_id in meshes]
    if not posed:
        raise StatsError("no posed objects")

    frames = sorted(scene.frames, key=lambda f: f.camera.frame_id)
    boxes_by_frame = {f.camera.frame_id: 0 for f in frames}
    area_fractions = []
    for t in tracks:
        for det in t.detections:
            if det.frame_id in boxes_by_frame:
                boxes_by_frame[det.frame_id] += 1
                cam = scene.frame(det.frame_id).camera
                w, h = cam.image_size
                x0, y0, x1, y1 = det.box
                area_fractions.append((x1 - x0) * (y1 - y0) / (w * h))
    objects_per_frame = float(np.mean([boxes_by_frame[f.camera.frame_id] for f in frames]))
    mean_area = float(np.mean(area_fractions)) if area_fractions else 0.0

    centroids = {
        t.track_id: apply_pose(poses[t.track_id], meshes[t.track_id].vertices.mean(axis=0))
        for t in posed
    }
    ratios = []
    for f in frames:
        depths = np.array([camera_depth(f.camera, c) for c in centroids.values()])
        depths = depths[depths > 0]
        if depths.size:
            ratios.append(float(depths.max() / depths.min()))
    z_range = float(np.mean(ratios)) if ratios else 0.0

    hist = [0] * N_TRUNCATION_BINS
    for t in posed:
        per_frame = [
            truncation_fraction(meshes[t.track_id], poses[t.track_id], f.camera,
                                n=truncation_samples)
            for f in frames
        ]
        mean_trunc = float(np.mean(per_frame))
        hist[min(int(mean_trunc * N_TRUNCATION_BINS), N_TRUNCATION_BINS - 1)] += 1

    return SceneStats(
        objects_per_frame=objects_per_frame,
        mean_bbox_area_fraction=mean_area,
        z_dynamic_range=z_range,
        truncation_histogram=tuple(hist),
    )


def stats_csv(stats: SceneStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    bins = [f"truncation_bin_{i}" for i in range(N_TRUNCATION_BINS)]
    writer.writerow(["objects_per_frame", "mean_bbox_area_fraction", "z_dynamic_range", *bins])
    writer.writerow([
        f"{stats.objects_per_frame:.6g}",
        f"{stats.mean_bbox_area_fraction:.6g}",
        f"{stats.z_dynamic_range:.6g}",
        *[str(b) for b in stats.truncation_histogram],
    ])
    return buf.getvalue()
