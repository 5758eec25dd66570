"""Vectorized evaluation of the pose objective and its gradients.

Everything is batched over pose hypotheses (axis B) so a multi-start
solve runs as single numpy expressions. The objective per start:

    L = L_repr + alpha * L_up + beta * L_front

L_repr sums, per frame, the minimum over symmetry-group elements of the
L1 pixel residuals of that frame's correspondences (the annotator may
have identified a symmetric object under any group rotation, and may
switch between frames). Items behind the camera contribute a constant
penalty of 2*(width+height) with zero gradient; the front-of-camera
hinge supplies the signal that pulls them back. L_up penalizes tilting
the object's up-axis away from the world's. Gradients are analytic and
flow through the per-frame argmin branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Pose9DoF
from ..mesh import SymmetryClass

Z_EPS = 1e-6
FLIP = np.array([-1.0, 1.0, 1.0])


class SolverError(ValueError):
    pass


@dataclass
class SolveData:
    """Correspondences and cameras flattened to per-item arrays, frame-sorted."""

    p: np.ndarray            # (N, 3) model points, flip already applied
    q: np.ndarray            # (N, 2) annotated pixels
    rc: np.ndarray           # (N, 3, 3) world-to-camera rotations
    tc: np.ndarray           # (N, 3)
    fx: np.ndarray           # (N,)
    fy: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    pen: np.ndarray          # (N,) behind-camera constant penalty
    frame_ids: list[int]     # sorted unique frame ids
    item_frame: np.ndarray   # (N,) index into frame_ids
    frame_start: np.ndarray  # (F,) reduceat offsets into item axis
    elements: np.ndarray     # (O, 3, 3) symmetry rotations, identity first
    mesh_up: np.ndarray      # (3,)
    world_up: np.ndarray     # (3,)
    up_gated: bool

    @property
    def n_items(self) -> int:
        return len(self.p)

    @property
    def n_frames(self) -> int:
        return len(self.frame_ids)


def build_solve_data(
    items,
    cams: dict,
    sym: SymmetryClass,
    flipped: bool,
    mesh_up,
    world_up,
    up_gated: bool,
) -> SolveData:
    """items: iterable of (frame_id, p_model (3,), q_pixel (2,))."""
    items = sorted(items, key=lambda it: it[0])
    if not items:
        raise SolverError("no correspondence items")
    missing = sorted({f for f, _, _ in items} - set(cams))
    if missing:
        raise SolverError(f"no camera for frames {missing}")
    p = np.array([it[1] for it in items], dtype=np.float64)
    if flipped:
        p = p * FLIP
    q = np.array([it[2] for it in items], dtype=np.float64)
    frame_of = [it[0] for it in items]
    frame_ids = sorted(set(frame_of))
    fidx = {f: i for i, f in enumerate(frame_ids)}
    item_frame = np.array([fidx[f] for f in frame_of], dtype=np.intp)
    frame_start = np.searchsorted(item_frame, np.arange(len(frame_ids)))
    cam_of = [cams[f] for f in frame_of]
    rc = np.stack([c.extrinsics[:, :3] for c in cam_of])
    tc = np.stack([c.extrinsics[:, 3] for c in cam_of])
    fx = np.array([c.intrinsics[0] for c in cam_of])
    fy = np.array([c.intrinsics[1] for c in cam_of])
    cx = np.array([c.intrinsics[2] for c in cam_of])
    cy = np.array([c.intrinsics[3] for c in cam_of])
    pen = np.array([2.0 * (c.image_size[0] + c.image_size[1]) for c in cam_of], dtype=np.float64)
    elements = np.stack(sym.elements())
    mesh_up = np.asarray(mesh_up, dtype=np.float64)
    world_up = np.asarray(world_up, dtype=np.float64)
    return SolveData(p, q, rc, tc, fx, fy, cx, cy, pen,
                     frame_ids, item_frame, frame_start, elements,
                     mesh_up, world_up, up_gated)


def eval_losses(
    R: np.ndarray,
    T: np.ndarray,
    S: np.ndarray,
    data: SolveData,
    alpha: float,
    beta: float,
    front_margin: float,
    want_grad: bool = False,
):
    """Losses (and optionally gradients) for a batch of poses.

    R (B,3,3), T (B,3), S (B,3). Returns a dict with per-start arrays:
    repr, up, front, total, chosen (B,F); plus g_R, g_T, g_S when
    want_grad.
    """
    B = R.shape[0]
    psym = np.einsum("oij,nj->oni", data.elements, data.p)          # (O,N,3)
    sp = S[:, None, None, :] * psym[None]                            # (B,O,N,3)
    X = np.einsum("bij,bonj->boni", R, sp) + T[:, None, None, :]
    Y = np.einsum("nij,bonj->boni", data.rc, X) + data.tc
    z = Y[..., 2]
    in_front = z > Z_EPS
    zsafe = np.where(in_front, z, 1.0)
    u = data.fx * Y[..., 0] / zsafe + data.cx
    v = data.fy * Y[..., 1] / zsafe + data.cy
    ru = u - data.q[:, 0]
    rv = v - data.q[:, 1]
    item_l1 = np.where(in_front, np.abs(ru) + np.abs(rv), data.pen)  # (B,O,N)
    frame_sums = np.add.reduceat(item_l1, data.frame_start, axis=-1)  # (B,O,F)
    chosen = np.argmin(frame_sums, axis=1)                            # (B,F)
    l_repr = np.take_along_axis(frame_sums, chosen[:, None, :], axis=1)[:, 0].sum(axis=-1)

    mup = R @ data.mesh_up
    res_up = mup - data.world_up
    l_up = np.abs(res_up).sum(axis=-1) if data.up_gated else np.zeros(B)

    z0 = z[:, 0]                                                     # (B,N) identity element
    hinge = np.maximum(0.0, front_margin - z0)
    l_front = hinge.sum(axis=-1)

    out = {
        "repr": l_repr,
        "up": l_up,
        "front": l_front,
        "total": l_repr + alpha * l_up + beta * l_front,
        "chosen": chosen,
    }
    if not want_grad:
        return out

    nr = np.arange(data.n_items)
    ci = chosen[:, data.item_frame]                                  # (B,N) element per item
    sel = lambda arr: np.take_along_axis(arr, ci[:, None, :], axis=1)[:, 0]
    ru_s, rv_s = sel(ru), sel(rv)
    front_mask = sel(in_front)
    z_s = sel(zsafe)
    yx_s, yy_s = sel(Y[..., 0]), sel(Y[..., 1])
    gu = np.where(front_mask, np.sign(ru_s), 0.0)
    gv = np.where(front_mask, np.sign(rv_s), 0.0)
    gy = np.empty((B, data.n_items, 3))
    gy[..., 0] = gu * data.fx / z_s
    gy[..., 1] = gv * data.fy / z_s
    gy[..., 2] = -(gu * data.fx * yx_s + gv * data.fy * yy_s) / (z_s * z_s)
    gx = np.einsum("nji,bnj->bni", data.rc, gy)
    psym_s = psym[ci, nr]                                            # (B,N,3)
    sp_s = S[:, None, :] * psym_s
    g_T = gx.sum(axis=1)
    g_R = np.einsum("bni,bnj->bij", gx, sp_s)
    g_S = (np.einsum("bji,bnj->bni", R, gx) * psym_s).sum(axis=1)

    active = (z0 < front_margin).astype(np.float64) * beta
    gx0 = -active[..., None] * data.rc[None, :, 2, :]
    sp0 = S[:, None, :] * psym[0][None]
    g_T = g_T + gx0.sum(axis=1)
    g_R = g_R + np.einsum("bni,bnj->bij", gx0, sp0)
    g_S = g_S + (np.einsum("bji,bnj->bni", R, gx0) * psym[0][None]).sum(axis=1)

    if data.up_gated and alpha != 0.0:
        g_R = g_R + alpha * np.einsum("bi,j->bij", np.sign(res_up), data.mesh_up)

    out.update(g_R=g_R, g_T=g_T, g_S=g_S)
    return out


def init_translations(R_starts: np.ndarray, data: SolveData) -> np.ndarray:
    """Linear least-squares translation per rotation start, with S = 1.

    The projection equation with fixed rotation is linear in T:
    fx*(r1.(A+T)+t1) = (qu-cx)*(r3.(A+T)+t3) with A = R_start @ p, and
    the v row likewise. The coefficient matrix is start-independent;
    only the right-hand side moves with A.
    """
    A = np.einsum("bij,nj->bni", R_starts, data.p)
    qu_c = data.q[:, 0] - data.cx
    qv_c = data.q[:, 1] - data.cy
    rc1, rc2, rc3 = data.rc[:, 0, :], data.rc[:, 1, :], data.rc[:, 2, :]
    t1, t2, t3 = data.tc[:, 0], data.tc[:, 1], data.tc[:, 2]
    row_u = data.fx[:, None] * rc1 - qu_c[:, None] * rc3
    row_v = data.fy[:, None] * rc2 - qv_c[:, None] * rc3
    a3 = np.einsum("ni,bni->bn", rc3, A) + t3
    rhs_u = -(data.fx * (np.einsum("ni,bni->bn", rc1, A) + t1)) + qu_c * a3
    rhs_v = -(data.fy * (np.einsum("ni,bni->bn", rc2, A) + t2)) + qv_c * a3
    m = np.concatenate([row_u, row_v], axis=0)                       # (2N,3)
    rhs = np.concatenate([rhs_u, rhs_v], axis=1)                     # (B,2N)
    mtm = m.T @ m + 1e-9 * np.eye(3)
    return np.linalg.solve(mtm, np.einsum("ni,bn->bi", m, rhs).T).T


def pose_from_arrays(R: np.ndarray, T: np.ndarray, S: np.ndarray) -> Pose9DoF:
    return Pose9DoF(T=np.array(T), R=np.array(R), S=np.array(S))
