"""Procedural scenes with known ground truth for benchmarks and tests.

Objects are primitive meshes placed upright with random 9-DoF poses,
observed by a ring of cameras. Correspondences come from projecting
model points through the ground-truth pose, optionally with pixel noise.
Point sets mimic how annotators actually click: only features on the
camera-facing side of an object are reachable, so generic objects get
low-relief one-sided point sets, and top-face objects get exactly
planar ones. Symmetric objects additionally have their model points
relabeled by a random symmetry group element per frame, imitating
annotators who pick equivalent but different surface points on
different frames of a rotationally symmetric object.

Ground-truth scales respect the constraints the solver can express, so
noiseless recovery is exact: rotationally tied objects (order 4 and 36)
share their two off-axis scales, and objects annotated only on their
top face take the tied normal scale (mean of the other two). Order-36
objects are never given top-face-only annotations, since their scale
mode cannot tie the up-axis scale to anything observable.

Everything is drawn from one seeded generator, so a spec + seed pair
reproduces the identical scene byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import CameraFrame, Pose9DoF, apply_pose, project_points, rotation_about_axis
from ..mesh import SymmetryClass, TriangleMesh
from ..primitives import box, l_extrusion, ngon_prism, tapered_wedge
from ..solver import CorrespondenceItem, CorrespondenceSet, scale_parameterization
from ..tracking import Detection, Track
from .scene_io import Scene, SceneFrame

EY = np.array([0.0, 1.0, 0.0])

UPRIGHT_CHOICES = ("chair", "table", "cabinet", "sofa", "bookshelf", "bin")


class SyntheticError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n_objects: int = 10
    noise_px: float = 0.0
    sym_frac: float = 0.278        # fraction of rotationally symmetric objects
    coplanar_frac: float = 0.155   # fraction annotated only on their top face
    n_cameras: int = 3             # clamped to 2..6
    min_frames: int = 3            # correspondence frames per object
    max_frames: int = 4
    n_points: int = 5
    relabel_symmetric: bool = True
    non_upright_frac: float = 0.1  # objects given a category outside the upright set
    image_size: tuple[int, int] = (800, 600)
    intrinsics: tuple[float, float, float, float] = (500.0, 500.0, 400.0, 300.0)
    camera_radius: float = 3.5
    camera_arc: float = 2.0 * np.pi  # orbit span; small values give a narrow baseline
    camera_height: tuple[float, float] = (1.0, 1.5)
    placement_radius: float = 1.0

    def __post_init__(self):
        if self.n_objects < 1:
            raise SyntheticError("n_objects must be >= 1")
        if not (0.0 <= self.sym_frac <= 1.0 and 0.0 <= self.coplanar_frac <= 1.0):
            raise SyntheticError("fractions must be within [0, 1]")
        if self.noise_px < 0:
            raise SyntheticError("noise_px must be >= 0")
        if self.min_frames < 1 or self.max_frames < self.min_frames:
            raise SyntheticError("frame range is invalid")
        if self.n_points < 4:
            raise SyntheticError("need at least 4 points per object")


@dataclass(frozen=True)
class SyntheticObject:
    track_id: str
    model_id: str
    mesh: TriangleMesh
    sym: SymmetryClass
    pose: Pose9DoF
    corr: CorrespondenceSet
    coplanar: bool
    category: str


@dataclass(frozen=True)
class SyntheticScene:
    scene: Scene
    objects: tuple[SyntheticObject, ...]
    tracks: tuple[Track, ...] = field(default_factory=tuple)

    def cameras(self):
        return self.scene.cameras()


def _look_at(eye: np.ndarray, target: np.ndarray) -> np.ndarray:
    fwd = target - eye
    fwd = fwd / np.linalg.norm(fwd)
    right = np.cross(fwd, EY)
    right = right / np.linalg.norm(right)
    down = np.cross(fwd, right)
    rc = np.stack([right, down, fwd])
    return np.concatenate([rc, (-rc @ eye)[:, None]], axis=1)


def _make_cameras(spec: SyntheticSpec, rng: np.random.Generator) -> list[CameraFrame]:
    n = int(np.clip(spec.n_cameras, 2, 6))
    cams = []
    base = rng.uniform(0.0, 2.0 * np.pi)
    full_circle = spec.camera_arc >= 2.0 * np.pi - 1e-9
    for k in range(n):
        if full_circle:
            ang = base + 2.0 * np.pi * k / n + rng.uniform(-0.15, 0.15)
        else:
            ang = base + spec.camera_arc * k / max(n - 1, 1) + rng.uniform(-0.02, 0.02)
        r = spec.camera_radius * rng.uniform(0.94, 1.06)
        lo, hi = spec.camera_height
        eye = np.array([r * np.cos(ang), rng.uniform(lo, hi), r * np.sin(ang)])
        cams.append(CameraFrame(
            frame_id=k,
            intrinsics=spec.intrinsics,
            extrinsics=_look_at(eye, np.zeros(3)),
            image_size=spec.image_size,
            timestamp=k * 1_000_000,
        ))
    return cams


def _make_mesh(order: int, i: int, category: str, rng: np.random.Generator) -> TriangleMesh:
    mid = f"m-{i:03d}"
    if order == 2:
        sx = rng.uniform(0.6, 1.0)
        sz = sx * rng.uniform(0.55, 0.8)  # distinct sides keep the order at 2
        return box(sx, rng.uniform(0.7, 1.2), sz, model_id=mid, category=category)
    if order == 4:
        return ngon_prism(4, radius=rng.uniform(0.35, 0.55), height=rng.uniform(0.7, 1.2),
                          model_id=mid, category=category)
    if order == 36:
        return ngon_prism(36, radius=rng.uniform(0.3, 0.5), height=rng.uniform(0.7, 1.3),
                          model_id=mid, category=category)
    if rng.uniform() < 0.5:
        return l_extrusion(size=rng.uniform(0.7, 1.0), height=rng.uniform(0.6, 1.0),
                           arm=rng.uniform(0.3, 0.45), model_id=mid, category=category)
    return tapered_wedge(size=rng.uniform(0.7, 1.0), height=rng.uniform(0.6, 1.0),
                         model_id=mid, category=category)


def _draw_scales(order: int, coplanar: bool, rng: np.random.Generator) -> np.ndarray:
    lo, hi = 0.75, 1.35
    if order in (4, 36):
        s = rng.uniform(lo, hi)
        sy = s if coplanar else rng.uniform(lo, hi)
        return np.array([s, sy, s])
    sx, sz = rng.uniform(lo, hi, size=2)
    sy = 0.5 * (sx + sz) if coplanar else rng.uniform(lo, hi)
    return np.array([sx, sy, sz])


def _top_face_points(mesh: TriangleMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    vs = mesh.vertices
    ymax = vs[:, 1].max()
    top = vs[np.abs(vs[:, 1] - ymax) < 1e-9]
    pts = [top[j % len(top)] for j in range(min(n, len(top)))]
    while len(pts) < n:
        w = rng.dirichlet(np.ones(len(top)))
        pts.append(w @ top)
    return np.stack(pts[:n])


def _visible_side_points(mesh: TriangleMesh, n: int, view_dir_model: np.ndarray,
                         rng: np.random.Generator) -> np.ndarray:
    """Draw n mesh vertices biased toward the side facing the cameras.

    Real annotators can only click features that are visible, so point
    sets concentrate on the camera-facing surface and carry little depth
    relief. The draw still rejects sets that fit_plane would call
    coplanar, because those would silently switch the solver into its
    two-scale mode.
    """
    from ..geometry import fit_plane

    vs = mesh.vertices
    centroid = vs.mean(axis=0)
    dots = (vs - centroid) @ view_dir_model
    order = np.argsort(-dots)
    pool = order[:max(n + 2, len(vs) // 2)]
    rest = order[len(pool):]
    for _ in range(50):
        idx = rng.choice(pool, size=min(n, len(pool)), replace=False)
        if len(rest) and rng.uniform() < 0.25:
            idx = idx.copy()
            idx[rng.integers(len(idx))] = rng.choice(rest)
        pts = vs[idx]
        if len(pts) >= 3 and not fit_plane(pts)[1]:
            return pts
    raise SyntheticError(f"could not draw non-coplanar points from mesh {mesh.model_id}")


def generate_synthetic_scene(spec: SyntheticSpec, seed: int = 0) -> SyntheticScene:
    """Build one scene with spec.n_objects ground-truth-posed objects."""
    rng = np.random.default_rng(seed)
    cams = _make_cameras(spec, rng)
    cam_by_id = {c.frame_id: c for c in cams}
    w, h = spec.image_size
    scene = Scene(
        scene_id=f"synth-{seed}",
        frames=tuple(
            SceneFrame(camera=c, image=f"images/synth-{seed}/{c.frame_id:06d}.png")
            for c in cams
        ),
        split="val",
    )

    objects = []
    tracks = []
    for i in range(spec.n_objects):
        symmetric = rng.uniform() < spec.sym_frac
        order = int(rng.choice([2, 4, 36])) if symmetric else 1
        coplanar = rng.uniform() < spec.coplanar_frac and order != 36
        upright = rng.uniform() >= spec.non_upright_frac
        category = str(rng.choice(UPRIGHT_CHOICES)) if upright else "pillow"
        mesh = _make_mesh(order, i, category, rng)
        sym = SymmetryClass(order=order, axis=EY)
        elements = sym.elements()

        if coplanar:
            top_points = _top_face_points(mesh, spec.n_points, rng)

        n_frames = int(rng.integers(spec.min_frames, spec.max_frames + 1))
        n_frames = min(n_frames, len(cams))
        frame_ids = sorted(rng.choice([c.frame_id for c in cams], size=n_frames, replace=False).tolist())
        centers = np.stack([
            -cam_by_id[fid].rotation.T @ cam_by_id[fid].translation for fid in frame_ids
        ])

        pose = None
        items = None
        for _ in range(200):
            ang = rng.uniform(0.0, 2.0 * np.pi)
            rad = spec.placement_radius * np.sqrt(rng.uniform())
            t = np.array([rad * np.cos(ang), rng.uniform(-0.2, 0.4), rad * np.sin(ang)])
            cand = Pose9DoF(T=t, R=rotation_about_axis(EY, rng.uniform(0.0, 2.0 * np.pi)),
                            S=_draw_scales(order, coplanar, rng))
            if coplanar:
                points = top_points
            else:
                view = centers.mean(axis=0) - t
                view = view / np.linalg.norm(view)
                points = _visible_side_points(mesh, spec.n_points, cand.R.T @ view, rng)
            trial_items = []
            ok = True
            for fid in frame_ids:
                j = int(rng.integers(order)) if (spec.relabel_symmetric and order > 1) else 0
                labeled = points @ elements[j].T
                world = apply_pose(cand, points)
                px, z = project_points(cam_by_id[fid], world)
                if spec.noise_px > 0:
                    px = px + rng.normal(scale=spec.noise_px, size=px.shape)
                if np.any(z < 0.3) or np.any(~np.isfinite(px)):
                    ok = False
                    break
                if (np.any(px[:, 0] < 0.02 * w) or np.any(px[:, 0] > 0.98 * w)
                        or np.any(px[:, 1] < 0.02 * h) or np.any(px[:, 1] > 0.98 * h)):
                    ok = False
                    break
                for p_lab, q in zip(labeled, px):
                    trial_items.append(CorrespondenceItem(frame_id=fid, p_model=p_lab, q_pixel=q))
            if ok:
                # the solver sees the relabeled union of points, so the
                # scale mode it will derive must match what the drawn
                # ground-truth scales satisfy
                union = np.stack([it.p_model for it in trial_items])
                mode = scale_parameterization(union, sym, EY).mode
                want = "rotsym_tied" if order == 36 else ("coplanar_2dof" if coplanar else "full")
                if mode != want:
                    continue
                pose = cand
                items = trial_items
                break
        if pose is None:
            raise SyntheticError(f"object {i}: no in-frame placement found")

        track_id = f"t-{i:03d}"
        corr = CorrespondenceSet(track_id=track_id, model_id=mesh.model_id, items=tuple(items))
        objects.append(SyntheticObject(
            track_id=track_id, model_id=mesh.model_id, mesh=mesh, sym=sym,
            pose=pose, corr=corr, coplanar=coplanar, category=category,
        ))

        desc = rng.normal(size=8)
        desc = desc / np.linalg.norm(desc)
        dets = []
        for c in cams:
            px, z = project_points(c, apply_pose(pose, mesh.vertices))
            vis = z > 0
            if vis.sum() < 3:
                continue
            x0, y0 = px[vis].min(axis=0)
            x1, y1 = px[vis].max(axis=0)
            if x1 - x0 < 1e-6 or y1 - y0 < 1e-6:
                continue
            dets.append(Detection(frame_id=c.frame_id, box=(x0, y0, x1, y1),
                                  category=category, score=1.0, descriptor=desc))
        tracks.append(Track(track_id=track_id, detections=dets, category=category))

    return SyntheticScene(scene=scene, objects=tuple(objects), tracks=tuple(tracks))


def pose_error(est: Pose9DoF, gt: Pose9DoF, sym: SymmetryClass) -> dict:
    """Recovery errors with rotation taken modulo the symmetry group.

    Returns rot_deg, trans (absolute), and scale_rel (worst per-axis
    relative error). Group elements are rotations about the up-axis, so
    with the generator's tied scales they never permute scale axes.
    """
    best = np.inf
    for g in sym.elements():
        c = (np.trace((gt.R @ g).T @ est.R) - 1.0) / 2.0
        best = min(best, float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))))
    return {
        "rot_deg": best,
        "trans": float(np.linalg.norm(est.T - gt.T)),
        "scale_rel": float(np.max(np.abs(est.S - gt.S) / gt.S)),
    }


def scene_diameter(synth: SyntheticScene) -> float:
    """Largest pairwise distance among camera centers and object centers."""
    pts = [
        -c.rotation.T @ c.translation
        for c in synth.cameras().values()
    ]
    pts += [o.pose.T for o in synth.objects]
    pts = np.stack(pts)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    return float(d.max())
