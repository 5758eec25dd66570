"""Camera model, 9-DoF pose transform, projection, and coplanarity analysis.

Conventions used throughout the toolkit:

  World frame : right-handed, scene units (typically meters). The world
                up direction is carried explicitly by Scene records.
  Camera frame: right-handed, +z forward (points in front of the camera
                have positive depth), +x right, +y down.
  Image frame : pixels, origin at the top-left corner, u right, v down.
  Model frame : the CAD model's canonical frame. Anisotropic scale is
                applied along these axes, *before* rotation:

                    world = R @ (S * p_model) + T
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHONORMAL_TOL = 1e-6


class GeometryError(ValueError):
    pass


def _as_vec3(p) -> np.ndarray:
    a = np.asarray(p, dtype=np.float64)
    if a.shape[-1] != 3:
        raise GeometryError(f"expected 3-vector(s), got shape {a.shape}")
    return a


def rotation_is_valid(r: np.ndarray, tol: float = ORTHONORMAL_TOL) -> bool:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        return False
    if not np.allclose(r.T @ r, np.eye(3), atol=tol):
        return False
    return bool(np.linalg.det(r) > 0)


@dataclass(frozen=True)
class CameraFrame:
    """Per-frame intrinsics and world-to-camera extrinsics.

    extrinsics is the 3x4 row-major matrix [R_c | t_c] mapping world
    points into the camera frame: p_cam = R_c @ p_world + t_c.
    """

    frame_id: int
    intrinsics: tuple[float, float, float, float]  # fx, fy, cx, cy
    extrinsics: np.ndarray                         # (3, 4)
    image_size: tuple[int, int]                    # width, height
    timestamp: int = 0                             # microseconds

    def __post_init__(self):
        ext = np.asarray(self.extrinsics, dtype=np.float64).reshape(3, 4)
        object.__setattr__(self, "extrinsics", ext)
        fx, fy, _, _ = self.intrinsics
        if fx <= 0 or fy <= 0:
            raise GeometryError(f"frame {self.frame_id}: focal lengths must be positive")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise GeometryError(f"frame {self.frame_id}: image size must be positive")
        if not rotation_is_valid(ext[:, :3]):
            raise GeometryError(
                f"frame {self.frame_id}: extrinsic rotation is not orthonormal with det=+1"
            )

    @property
    def rotation(self) -> np.ndarray:
        return self.extrinsics[:, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.extrinsics[:, 3]


@dataclass(frozen=True)
class Pose9DoF:
    """9-DoF placement of a CAD model: translation T, rotation R, per-axis scale S."""

    T: np.ndarray  # (3,)
    R: np.ndarray  # (3, 3)
    S: np.ndarray  # (3,), all positive

    def __post_init__(self):
        object.__setattr__(self, "T", _as_vec3(self.T).reshape(3).copy())
        object.__setattr__(self, "R", np.asarray(self.R, dtype=np.float64).reshape(3, 3).copy())
        object.__setattr__(self, "S", _as_vec3(self.S).reshape(3).copy())
        if not rotation_is_valid(self.R):
            raise GeometryError("pose rotation is not orthonormal with det=+1")
        if np.any(self.S <= 0):
            raise GeometryError("pose scales must be positive")

    @classmethod
    def identity(cls) -> "Pose9DoF":
        return cls(T=np.zeros(3), R=np.eye(3), S=np.ones(3))


@dataclass(frozen=True)
class PlaneFit:
    normal: np.ndarray      # unit 3-vector (arbitrary when degenerate)
    offset: float           # plane is {p : normal . p = offset}
    rms_residual: float
    is_degenerate: bool


def apply_pose(pose: Pose9DoF, p) -> np.ndarray:
    """Map model-space point(s) to world space: R @ (S * p) + T.

    Accepts a single 3-vector or an (N, 3) array.
    """
    p = _as_vec3(p)
    return (pose.S * p) @ pose.R.T + pose.T


def camera_depth(cam: CameraFrame, p_world) -> float | np.ndarray:
    """Signed z of world point(s) in the camera frame."""
    p = _as_vec3(p_world)
    d = p @ cam.rotation[2] + cam.translation[2]
    return float(d) if d.ndim == 0 else d


def project_point(cam: CameraFrame, p_world) -> np.ndarray | None:
    """Project a world point to pixels; None signals the point is behind the camera.

    The returned pixel may lie outside the image bounds; callers decide
    how to treat that.
    """
    p = _as_vec3(p_world).reshape(3)
    pc = cam.rotation @ p + cam.translation
    if pc[2] <= 0:
        return None
    fx, fy, cx, cy = cam.intrinsics
    return np.array([fx * pc[0] / pc[2] + cx, fy * pc[1] / pc[2] + cy])


def project_points(cam: CameraFrame, p_world: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection of (N, 3) world points.

    Returns (pixels (N, 2), depths (N,)). Pixels of points at depth <= 0
    are filled with NaN.
    """
    p = _as_vec3(p_world).reshape(-1, 3)
    pc = p @ cam.rotation.T + cam.translation
    z = pc[:, 2]
    fx, fy, cx, cy = cam.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        px = np.stack([fx * pc[:, 0] / z + cx, fy * pc[:, 1] / z + cy], axis=1)
    px[z <= 0] = np.nan
    return px, z


def fit_plane(points, rel_tol: float = 0.02) -> tuple[PlaneFit, bool]:
    """Least-squares plane through >= 3 points via SVD of the centered matrix.

    Returns (PlaneFit, is_coplanar) with is_coplanar = sigma_min <= rel_tol * sigma_max.
    Collinear or coincident inputs produce a degenerate fit (normal undefined).
    """
    pts = _as_vec3(points).reshape(-1, 3)
    if pts.shape[0] < 3:
        raise GeometryError(f"fit_plane needs >= 3 points, got {pts.shape[0]}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    # singular values of the centered point matrix; sigma[2] measures
    # out-of-plane spread, sigma[1] in-plane spread
    u, sigma, vt = np.linalg.svd(centered, full_matrices=False)
    s_max, s_mid, s_min = sigma
    # collinear / coincident inputs leave the normal undefined; this is a
    # much tighter condition than the coplanarity tolerance
    degenerate = s_max == 0.0 or s_mid <= 1e-9 * s_max
    normal = vt[2]
    normal = normal / np.linalg.norm(normal)
    rms = float(s_min / np.sqrt(pts.shape[0]))
    fit = PlaneFit(
        normal=normal,
        offset=float(normal @ centroid),
        rms_residual=rms,
        is_degenerate=bool(degenerate),
    )
    coplanar = (not degenerate) and s_min <= rel_tol * s_max
    return fit, coplanar


def rotation_angle_deg(r: np.ndarray) -> float:
    """Rotation angle of a rotation matrix, in degrees."""
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def rotation_about_axis(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis."""
    a = _as_vec3(axis).reshape(3)
    a = a / np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle_rad) * k + (1 - np.cos(angle_rad)) * (k @ k)
