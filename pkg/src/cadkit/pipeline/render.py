"""Flat-shaded PNG renders of posed meshes, one image per camera.

These are the frame images the annotation UI displays and draws boxes
over. Painter's algorithm over all triangles of all objects: far faces
first, each filled with its object's palette color shaded by face
orientation, edges drawn slightly darker. No external renderer, just
Pillow polygons.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from ..geometry import CameraFrame, Pose9DoF, apply_pose
from ..mesh import TriangleMesh

BACKGROUND = (235, 235, 232)
PALETTE = (
    (204, 92, 74),
    (86, 140, 190),
    (112, 166, 96),
    (188, 152, 80),
    (142, 104, 170),
    (84, 168, 160),
    (196, 118, 158),
    (130, 130, 130),
)


def _shade(color, factor):
    return tuple(int(c * factor) for c in color)


def render_frame(
    cam: CameraFrame,
    objects: list[tuple[TriangleMesh, Pose9DoF]],
    background=BACKGROUND,
) -> Image.Image:
    """Render posed meshes through one camera into an RGB image."""
    w, h = cam.image_size
    img = Image.new("RGB", (w, h), background)
    draw = ImageDraw.Draw(img)

    tris = []  # (mean depth, pixel triangle, fill, outline)
    for idx, (mesh, pose) in enumerate(objects):
        color = PALETTE[idx % len(PALETTE)]
        world = apply_pose(pose, mesh.vertices)
        Y = world @ cam.rotation.T + cam.translation
        z = Y[:, 2]
        px = np.empty((len(Y), 2))
        ok = z > 1e-6
        zs = np.where(ok, z, 1.0)
        fx, fy, cx, cy = cam.intrinsics
        px[:, 0] = fx * Y[:, 0] / zs + cx
        px[:, 1] = fy * Y[:, 1] / zs + cy

        for tri in mesh.triangles:
            if not ok[tri].all():
                continue
            a, b, c = world[tri]
            normal = np.cross(b - a, c - a)
            nn = np.linalg.norm(normal)
            if nn < 1e-12:
                continue
            normal /= nn
            center = (a + b + c) / 3.0
            view = cam.rotation[2]  # camera forward in world axes
            # simple lambert against the view direction, both-sided
            lam = 0.45 + 0.55 * abs(float(normal @ view))
            corners = [tuple(px[i]) for i in tri]
            tris.append((
                float(z[tri].mean()),
                corners,
                _shade(color, lam),
                _shade(color, lam * 0.6),
            ))

    tris.sort(key=lambda t: -t[0])
    for _, corners, fill, outline in tris:
        draw.polygon(corners, fill=fill, outline=outline)
    return img


def render_scene_frames(scene, objects, out_dir) -> list[str]:
    """Write one PNG per scene frame; returns the paths written.

    objects: list of (mesh, pose). Files land at out_dir/<frame id>.png
    using the zero-padded frame id, matching the scene's image paths.
    """
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for f in scene.frames:
        img = render_frame(f.camera, objects)
        path = out / f"{f.camera.frame_id:06d}.png"
        img.save(path)
        written.append(str(path))
    return written
