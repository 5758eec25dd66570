"""Multi-start pose estimation from 2D-3D correspondences.

The solve minimizes reprojection + alpha * up-axis + beta * front-of-
camera terms over translation, rotation (6D parameterization), and
anisotropic scale (log-space, mode chosen by scale_parameterization).
24 rotation starts from the chiral octahedral group each get a closed-
form least-squares translation, then run Adam with a cosine-decayed
learning rate; the start with the lowest final total wins. Everything
is deterministic for a fixed config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Pose9DoF
from ..mesh import SymmetryClass, TriangleMesh
from .corresp import CorrespondenceSet, validate_correspondences
from .engine import SolverError, build_solve_data, eval_losses, init_translations
from .rotation import matrix_to_sixd, octahedral_rotations, sixd_backward, sixd_to_matrix
from .scales import (
    ScaleParameterization,
    contract_scale_grad,
    expand_scales,
    scale_parameterization,
)

DEFAULT_UPRIGHT = frozenset(
    {"chair", "table", "cabinet", "sofa", "bed", "bookshelf", "display", "bin"}
)
MIN_ITEMS = 4


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 10.0          # up-axis weight
    beta: float = 100.0          # front-of-camera weight
    steps: int = 500
    learning_rate: float = 0.05
    n_starts: int = 24
    seed: int = 0
    upright_categories: frozenset = DEFAULT_UPRIGHT
    front_margin: float = 0.1
    tau_verify_px: float = 5.0   # convergence gate on mean pixel residual
    enable_symmetry: bool = True   # min over the symmetry group in L_repr
    enable_coplanar: bool = True   # allow the coplanar_2dof scale mode

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise SolverError("alpha and beta must be >= 0")
        if self.steps < 1:
            raise SolverError("steps must be >= 1")
        if self.n_starts < 1:
            raise SolverError("n_starts must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    pose: Pose9DoF
    final_losses: tuple[float, float, float]  # (repr, up, front), unweighted
    mean_reproj_px: float
    chosen_symmetry_index: int
    scale_mode: str
    converged: bool
    per_frame_residuals: dict[int, float] = field(default_factory=dict)
    total_loss: float = 0.0
    start_index: int = 0
    underdetermined_scale: bool = False

    def __post_init__(self):
        if any(v < 0 for v in self.final_losses):
            raise SolverError("losses must be >= 0")


def _rotation_starts(cfg: SolverConfig) -> np.ndarray:
    base = octahedral_rotations()
    if cfg.n_starts <= len(base):
        return base[: cfg.n_starts]
    rng = np.random.default_rng(cfg.seed)
    extra = []
    for _ in range(cfg.n_starts - len(base)):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        w, x, y, z = q
        extra.append(
            np.array(
                [
                    [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                    [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                    [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
                ]
            )
        )
    return np.concatenate([base, np.stack(extra)], axis=0)


def _adam_step(params, grads, state, lr):
    b1, b2, eps = 0.9, 0.999, 1e-8
    state["t"] += 1
    t = state["t"]
    for k in params:
        m = state["m"][k] = b1 * state["m"][k] + (1 - b1) * grads[k]
        v = state["v"][k] = b2 * state["v"][k] + (1 - b2) * grads[k] ** 2
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        params[k] -= lr * mhat / (np.sqrt(vhat) + eps)


def estimate_pose(
    corr: CorrespondenceSet,
    cams: dict,
    mesh: TriangleMesh,
    sym: SymmetryClass,
    cfg: SolverConfig = SolverConfig(),
    world_up=(0.0, 1.0, 0.0),
) -> SolveResult:
    """Fit a 9-DoF pose to one track's correspondences.

    cams maps frame_id to CameraFrame. The mesh supplies the canonical
    up-axis and the category used to gate the up-axis term.
    """
    if len(corr.items) < MIN_ITEMS:
        raise SolverError(
            f"underdetermined: need at least {MIN_ITEMS} correspondence items, got {len(corr.items)}"
        )
    validate_correspondences(corr, cams)

    eff_sym = sym if cfg.enable_symmetry else SymmetryClass(order=1, axis=mesh.up_axis)
    sparam = scale_parameterization(corr.model_points(), eff_sym, mesh.up_axis)
    if not cfg.enable_coplanar and sparam.mode == "coplanar_2dof":
        sparam = ScaleParameterization("full", -1, sparam.underdetermined,
                                       note="coplanar mode disabled by config")

    up_gated = mesh.category in cfg.upright_categories
    data = build_solve_data(
        corr.as_tuples(), cams, eff_sym, corr.flipped,
        mesh_up=mesh.up_axis, world_up=np.asarray(world_up, dtype=np.float64),
        up_gated=up_gated,
    )

    starts = _rotation_starts(cfg)
    B = len(starts)
    a, b = matrix_to_sixd(starts)
    T0 = init_translations(starts, data)
    params = {"a": a, "b": b, "t": T0, "u": np.zeros((B, 3))}
    state = {"t": 0, "m": {k: np.zeros_like(v) for k, v in params.items()},
             "v": {k: np.zeros_like(v) for k, v in params.items()}}

    for step in range(cfg.steps):
        R = sixd_to_matrix(params["a"], params["b"])
        S = expand_scales(params["u"], sparam)
        out = eval_losses(R, params["t"], S, data, cfg.alpha, cfg.beta,
                          cfg.front_margin, want_grad=True)
        g_a, g_b = sixd_backward(params["a"], params["b"], out["g_R"])
        grads = {"a": g_a, "b": g_b, "t": out["g_T"],
                 "u": contract_scale_grad(params["u"], out["g_S"], sparam)}
        lr = cfg.learning_rate * 0.5 * (1.0 + np.cos(np.pi * step / cfg.steps))
        _adam_step(params, grads, state, lr)

    R = sixd_to_matrix(params["a"], params["b"])
    S = expand_scales(params["u"], sparam)
    T = params["t"]
    final = eval_losses(R, T, S, data, cfg.alpha, cfg.beta, cfg.front_margin)
    bad = ~np.isfinite(final["total"])
    if bad.all():
        raise SolverError(f"non-finite loss in all starts (first at start {int(bad.argmax())})")
    totals = np.where(bad, np.inf, final["total"])
    best = int(np.argmin(totals))

    # pixel diagnostics for the winning start, at its chosen group elements
    chosen = final["chosen"][best]                                    # (F,)
    resid = _pixel_residuals(R[best], T[best], S[best], data, chosen)  # (N,)
    per_frame = {}
    for fi, fid in enumerate(data.frame_ids):
        mask = data.item_frame == fi
        per_frame[fid] = float(resid[mask].mean())
    mean_px = float(resid.mean())

    pose = Pose9DoF(T=T[best].copy(), R=R[best].copy(), S=S[best].copy())
    return SolveResult(
        pose=pose,
        final_losses=(float(final["repr"][best]), float(final["up"][best]), float(final["front"][best])),
        mean_reproj_px=mean_px,
        chosen_symmetry_index=int(chosen[0]),
        scale_mode=sparam.mode,
        converged=bool(mean_px <= cfg.tau_verify_px),
        per_frame_residuals=per_frame,
        total_loss=float(final["total"][best]),
        start_index=best,
        underdetermined_scale=sparam.underdetermined,
    )


def _pixel_residuals(R, T, S, data, chosen) -> np.ndarray:
    """Euclidean pixel residual per item under the chosen group elements.

    Behind-camera items take the constant penalty value so they can
    never pass verification."""
    psel = np.einsum("nij,nj->ni", data.elements[chosen[data.item_frame]], data.p)
    X = (S * psel) @ R.T + T
    Y = np.einsum("nij,nj->ni", data.rc, X) + data.tc
    z = Y[:, 2]
    ok = z > 1e-6
    zs = np.where(ok, z, 1.0)
    du = data.fx * Y[:, 0] / zs + data.cx - data.q[:, 0]
    dv = data.fy * Y[:, 1] / zs + data.cy - data.q[:, 1]
    return np.where(ok, np.hypot(du, dv), data.pen)


def verify_pose_proxy(result: SolveResult, tau_px: float) -> bool:
    """Programmatic stand-in for the human alignment check.

    Accept when the overall mean pixel residual is within tau_px and no
    single frame's mean exceeds twice that."""
    if result.mean_reproj_px > tau_px:
        return False
    return all(v <= 2.0 * tau_px for v in result.per_frame_residuals.values())


def dump_solve_result_json(result: SolveResult) -> str:
    p = result.pose
    return json.dumps(
        {
            "pose": {
                "T": [float(x) for x in p.T],
                "R": [float(x) for x in p.R.reshape(-1)],
                "S": [float(x) for x in p.S],
            },
            "final_losses": {
                "reprojection": result.final_losses[0],
                "up": result.final_losses[1],
                "front": result.final_losses[2],
            },
            "total_loss": result.total_loss,
            "mean_reproj_px": result.mean_reproj_px,
            "per_frame_residuals": {str(k): v for k, v in sorted(result.per_frame_residuals.items())},
            "chosen_symmetry_index": result.chosen_symmetry_index,
            "scale_mode": result.scale_mode,
            "converged": result.converged,
            "start_index": result.start_index,
            "underdetermined_scale": result.underdetermined_scale,
        },
        indent=2,
        sort_keys=True,
    )


def load_solve_result_json(text: str) -> SolveResult:
    try:
        d = json.loads(text)
        pose = Pose9DoF(
            T=np.array(d["pose"]["T"], dtype=np.float64),
            R=np.array(d["pose"]["R"], dtype=np.float64).reshape(3, 3),
            S=np.array(d["pose"]["S"], dtype=np.float64),
        )
        fl = d["final_losses"]
        return SolveResult(
            pose=pose,
            final_losses=(fl["reprojection"], fl["up"], fl["front"]),
            mean_reproj_px=float(d["mean_reproj_px"]),
            chosen_symmetry_index=int(d["chosen_symmetry_index"]),
            scale_mode=str(d["scale_mode"]),
            converged=bool(d["converged"]),
            per_frame_residuals={int(k): float(v) for k, v in d.get("per_frame_residuals", {}).items()},
            total_loss=float(d.get("total_loss", 0.0)),
            start_index=int(d.get("start_index", 0)),
            underdetermined_scale=bool(d.get("underdetermined_scale", False)),
        )
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise SolverError(f"bad solve result JSON: {exc}") from exc
