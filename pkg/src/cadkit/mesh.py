"""CAD model geometry: OBJ loading, surface sampling, symmetry detection, truncation.

Symmetry detection classifies a model as rotationally symmetric about its
up-axis with order 36, 4, 2, or 1 (no symmetry). Orders are tested
descending and the first that holds wins, so a round table reports 36
rather than 4 or 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import CameraFrame, Pose9DoF, apply_pose, project_points, rotation_about_axis

SYMMETRY_ORDERS = (36, 4, 2)
DEFAULT_SYMMETRY_SAMPLES = 2000
# fraction of the footprint diagonal perpendicular to the up-axis; the
# rotation of a non-symmetric shape displaces surface by ~radius * angle,
# so the radial extent (not the full bbox diagonal) is the right scale
TAU_SYM = 0.004


class MeshError(ValueError):
    pass


class ObjParseError(MeshError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class TriangleMesh:
    vertices: np.ndarray   # (V, 3) canonical model frame
    triangles: np.ndarray  # (F, 3) int vertex indices
    up_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    model_id: str = ""
    category: str = ""

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.up_axis = np.asarray(self.up_axis, dtype=np.float64).reshape(3)
        if self.triangles.shape[0] < 1:
            raise MeshError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= self.vertices.shape[0]:
            raise MeshError("triangle index out of range")
        n = np.linalg.norm(self.up_axis)
        if abs(n - 1.0) > 1e-6:
            raise MeshError("up_axis must be unit length")

    def triangle_areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def bbox_diagonal(self) -> float:
        ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(ext))

    def footprint_diagonal(self) -> float:
        """Bbox diagonal of the vertices projected onto the plane perpendicular to up_axis."""
        perp = self.vertices - np.outer(self.vertices @ self.up_axis, self.up_axis)
        ext = perp.max(axis=0) - perp.min(axis=0)
        return float(np.linalg.norm(ext))


def load_mesh(data: bytes | str, model_id: str = "", category: str = "") -> TriangleMesh:
    """Parse a Wavefront OBJ subset: 'v x y z' and 'f i j k...' records.

    Faces use 1-based indices (negative indices count from the end);
    polygons are fan-triangulated. All other record types are ignored.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = data
    vertices: list[list[float]] = []
    triangles: list[tuple[int, int, int]] = []

    def resolve(token: str, line_no: int) -> int:
        # "i", "i/t", "i/t/n", "i//n" all start with the vertex index
        head = token.split("/")[0]
        try:
            idx = int(head)
        except ValueError:
            raise ObjParseError(line_no, f"bad face index {token!r}") from None
        if idx < 0:
            idx = len(vertices) + idx
        else:
            idx = idx - 1
        if idx < 0 or idx >= len(vertices):
            raise ObjParseError(line_no, f"face index {token!r} out of range (have {len(vertices)} vertices)")
        return idx

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise ObjParseError(line_no, "vertex record needs 3 coordinates")
            try:
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError:
                raise ObjParseError(line_no, f"bad vertex coordinate in {line!r}") from None
        elif parts[0] == "f":
            idxs = [resolve(tok, line_no) for tok in parts[1:]]
            if len(idxs) < 3:
                raise ObjParseError(line_no, "face record needs >= 3 indices")
            for k in range(1, len(idxs) - 1):
                triangles.append((idxs[0], idxs[k], idxs[k + 1]))
        # vn, vt, o, g, s, usemtl, mtllib ... ignored

    if not triangles:
        raise MeshError("OBJ contains no faces")
    return TriangleMesh(
        vertices=np.array(vertices), triangles=np.array(triangles),
        model_id=model_id, category=category,
    )


def dump_mesh(mesh: TriangleMesh) -> str:
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
    return "\n".join(lines) + "\n"


def sample_surface(mesh: TriangleMesh, n: int, seed: int = 0) -> np.ndarray:
    """n points sampled area-uniformly on the surface; deterministic per seed."""
    if n < 1:
        raise MeshError("need n >= 1 samples")
    areas = mesh.triangle_areas()
    total = areas.sum()
    if total <= 0:
        raise MeshError("mesh has zero total surface area")
    rng = np.random.default_rng(seed)
    tri_idx = rng.choice(len(areas), size=n, p=areas / total)
    # uniform barycentric coordinates via the sqrt trick
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a = 1.0 - r1
    b = r1 * (1.0 - r2)
    c = r1 * r2
    t = mesh.triangles[tri_idx]
    v = mesh.vertices
    return a[:, None] * v[t[:, 0]] + b[:, None] * v[t[:, 1]] + c[:, None] * v[t[:, 2]]


@dataclass(frozen=True)
class SymmetryClass:
    order: int                # 1, 2, 4 or 36
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self):
        if self.order not in (1, 2, 4, 36):
            raise MeshError(f"symmetry order must be one of 1/2/4/36, got {self.order}")
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=np.float64).reshape(3))

    def elements(self) -> list[np.ndarray]:
        """Rotation matrices of the cyclic group about the axis."""
        return [rotation_about_axis(self.axis, 2 * np.pi * j / self.order) for j in range(self.order)]


def _chamfer(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Chamfer distance: mean NN distance, averaged over both directions."""
    d_ab = cKDTree(b).query(a)[0].mean()
    d_ba = cKDTree(a).query(b)[0].mean()
    return float(0.5 * (d_ab + d_ba))


def detect_symmetry(
    mesh: TriangleMesh,
    n_samples: int = DEFAULT_SYMMETRY_SAMPLES,
    tau: float = TAU_SYM,
    seed: int = 0,
) -> SymmetryClass:
    """Detect the rotational symmetry order of a mesh about its up-axis.

    Two independent surface samples A and B are drawn. For each candidate
    order k (descending), A rotated by 2*pi/k is compared to B with the
    symmetric Chamfer distance. The point-sampling noise floor — the
    Chamfer distance between the *unrotated* A and B — is subtracted, so
    the statistic measures only the geometric effect of the rotation:

        chamfer(rot_k(A), B) - chamfer(A, B) <= tau * footprint_diagonal

    The first k that holds is reported; otherwise order 1.
    """
    a = sample_surface(mesh, n_samples, seed=seed)
    b = sample_surface(mesh, n_samples, seed=seed + 1)
    baseline = _chamfer(a, b)
    threshold = tau * mesh.footprint_diagonal()
    for k in SYMMETRY_ORDERS:
        rot = rotation_about_axis(mesh.up_axis, 2 * np.pi / k)
        if _chamfer(a @ rot.T, b) - baseline <= threshold:
            return SymmetryClass(order=k, axis=mesh.up_axis)
    return SymmetryClass(order=1, axis=mesh.up_axis)


def truncation_fraction(
    mesh: TriangleMesh, pose: Pose9DoF, cam: CameraFrame, n: int = 1000, seed: int = 0
) -> float:
    """Fraction of surface samples projecting outside the image or behind the camera."""
    if n < 100:
        raise MeshError("need n >= 100 samples for a stable truncation estimate")
    pts = sample_surface(mesh, n, seed=seed)
    px, z = project_points(cam, apply_pose(pose, pts))
    w, h = cam.image_size
    behind = z <= 0
    inside = (
        ~behind
        & (px[:, 0] >= 0) & (px[:, 0] < w)
        & (px[:, 1] >= 0) & (px[:, 1] < h)
    )
    return float(1.0 - inside.mean())
