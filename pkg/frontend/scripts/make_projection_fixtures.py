#!/usr/bin/env python3
"""Regenerate the golden projection fixtures under tests/fixtures/.

Each fixture holds a mesh's vertices, a 9-DoF pose, a handful of
cameras in the service wire format, and the pixel coordinates the
service's own projection produces. The browser code must reproduce
those pixels to within half a pixel; any drift means the two sides
disagree about camera or pose conventions and every annotation made in
the UI would land subtly off.

Run from the frontend directory:  python3 scripts/make_projection_fixtures.py
"""

import json
from pathlib import Path

import numpy as np

from cadkit.geometry import CameraFrame, Pose9DoF, apply_pose, project_point, rotation_about_axis
from cadkit.primitives import box, l_extrusion, ngon_prism

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# Mirror transform the solver applies to flipped correspondence sets.
FLIP = np.array([-1.0, 1.0, 1.0])


def look_at(eye, target, fx=480.0, fy=500.0, image_size=(800, 600), frame_id=0):
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.array([0.0, 1.0, 0.0])
    z = target - eye
    z = z / np.linalg.norm(z)
    x = np.cross(z, up)
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    r = np.stack([x, y, z])
    t = -r @ eye
    return CameraFrame(
        frame_id=frame_id,
        timestamp=float(frame_id),
        intrinsics=(fx, fy, image_size[0] / 2.0, image_size[1] / 2.0),
        extrinsics=np.concatenate([r, t[:, None]], axis=1),
        image_size=image_size,
    )


def camera_json(cam: CameraFrame) -> dict:
    return {
        "frame_id": cam.frame_id,
        "timestamp": cam.timestamp,
        "intrinsics": list(cam.intrinsics),
        "extrinsics": [float(v) for v in np.asarray(cam.extrinsics).reshape(-1)],
        "image_size": list(cam.image_size),
    }


def build_case(name, mesh, pose, cams, flipped):
    vertices = np.asarray(mesh.vertices, dtype=np.float64)
    expected = []
    for cam in cams:
        row = []
        for v in vertices:
            p = FLIP * v if flipped else v
            px = project_point(cam, apply_pose(pose, p))
            row.append(None if px is None else [float(px[0]), float(px[1])])
        expected.append(row)
    return {
        "name": name,
        "flipped": flipped,
        "vertices": [[float(x) for x in v] for v in vertices],
        "pose": {
            "T": [float(x) for x in pose.T],
            "R": [float(x) for x in np.asarray(pose.R).reshape(-1)],
            "S": [float(x) for x in pose.S],
        },
        "frames": [camera_json(c) for c in cams],
        "expected": expected,
    }


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(1234)

    cases = []

    # A scaled, rotated box seen from three sides.
    r_a = rotation_about_axis([0.2, 1.0, 0.1], 0.8)
    pose_a = Pose9DoF(T=np.array([0.3, -0.2, 0.1]),
                      R=r_a, S=np.array([1.1, 0.9, 1.3]))
    cams_a = [
        look_at([3.0, 1.5, 3.2], [0.3, -0.2, 0.1], frame_id=0),
        look_at([-2.8, 2.0, 2.5], [0.3, -0.2, 0.1], frame_id=1),
        look_at([0.5, 3.5, -3.0], [0.3, -0.2, 0.1], frame_id=2),
    ]
    cases.append(build_case("box_three_views", box(1.2, 0.8, 0.6), pose_a, cams_a, False))

    # A prism with unequal focal lengths and an off-center pose.
    r_b = rotation_about_axis(rng.normal(size=3), 2.1)
    pose_b = Pose9DoF(T=np.array([-0.6, 0.4, 0.9]),
                      R=r_b, S=np.array([0.7, 1.8, 0.7]))
    cams_b = [
        look_at([2.2, 2.2, 4.0], [-0.6, 0.4, 0.9], fx=350.0, fy=410.0,
                image_size=(640, 480), frame_id=0),
        look_at([-3.5, 0.8, -1.5], [-0.6, 0.4, 0.9], fx=350.0, fy=410.0,
                image_size=(640, 480), frame_id=7),
    ]
    cases.append(build_case("prism_two_views", ngon_prism(7, radius=0.6, height=1.4),
                            pose_b, cams_b, False))

    # A mirrored asymmetric shape, with one camera that faces away so
    # part of the expectations are behind-camera nulls.
    r_c = rotation_about_axis([1.0, 0.3, -0.2], -0.6)
    pose_c = Pose9DoF(T=np.array([0.0, 0.1, 2.0]),
                      R=r_c, S=np.array([1.4, 1.0, 0.8]))
    cam_front = look_at([0.5, 1.0, 5.5], [0.0, 0.1, 2.0], frame_id=0)
    cam_away = look_at([0.0, 0.5, 4.5], [0.0, 0.5, 9.0], frame_id=1)
    cases.append(build_case("flipped_l_shape", l_extrusion(1.0, 1.2, arm=0.35),
                            pose_c, [cam_front, cam_away], True))

    for case in cases:
        path = OUT_DIR / f"projection_{case['name']}.json"
        path.write_text(json.dumps(case, indent=1), encoding="utf-8")
        n_null = sum(px is None for row in case["expected"] for px in row)
        print(f"wrote {path.name}: {len(case['vertices'])} vertices, "
              f"{len(case['frames'])} frames, {n_null} behind-camera")


if __name__ == "__main__":
    main()
