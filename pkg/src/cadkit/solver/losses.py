"""Scalar loss entry points for a single pose.

Thin wrappers over the batched engine so tests and callers can probe
individual objective terms without setting up a solve.
"""

from __future__ import annotations

import numpy as np

from ..geometry import Pose9DoF
from ..mesh import SymmetryClass
from .corresp import CorrespondenceSet
from .engine import build_solve_data, eval_losses

WORLD_UP = np.array([0.0, 1.0, 0.0])


def _single(pose: Pose9DoF, corr: CorrespondenceSet, cams, sym, world_up, up_gated,
            alpha=0.0, beta=0.0, front_margin=0.0):
    data = build_solve_data(corr.as_tuples(), cams, sym, corr.flipped,
                            mesh_up=sym.axis, world_up=world_up, up_gated=up_gated)
    return eval_losses(pose.R[None], pose.T[None], pose.S[None], data,
                       alpha=alpha, beta=beta, front_margin=front_margin)


def reprojection_loss(pose: Pose9DoF, corr: CorrespondenceSet, cams: dict, sym: SymmetryClass) -> float:
    """Summed per-frame minimum-over-symmetry L1 pixel residual."""
    out = _single(pose, corr, cams, sym, WORLD_UP, up_gated=False)
    return float(out["repr"][0])


def up_axis_loss(R: np.ndarray, mesh_up, world_up,
                 category: str | None = None,
                 upright_categories=None) -> float:
    """L1 distance between the rotated model up-axis and the world's.

    When a category and an upright set are given and the category is not
    in the set, the penalty is waived (soft or deformable classes).
    """
    if category is not None and upright_categories is not None and category not in upright_categories:
        return 0.0
    res = np.asarray(R, dtype=np.float64) @ np.asarray(mesh_up, dtype=np.float64) - np.asarray(world_up, dtype=np.float64)
    return float(np.abs(res).sum())


def front_loss(pose: Pose9DoF, corr: CorrespondenceSet, cams: dict, margin: float = 0.0) -> float:
    """Hinge on camera depth: sum of max(0, margin - depth) over items."""
    sym = SymmetryClass(order=1, axis=WORLD_UP)
    out = _single(pose, corr, cams, sym, WORLD_UP, up_gated=False, front_margin=margin)
    return float(out["front"][0])


def total_loss(
    pose: Pose9DoF,
    corr: CorrespondenceSet,
    cams: dict,
    sym: SymmetryClass,
    cfg,
    world_up=WORLD_UP,
    category: str | None = None,
) -> float:
    """reprojection + alpha * up + beta * front for one pose.

    The up term uses the symmetry axis as the model up-axis and is gated
    by cfg.upright_categories when a category is given; omitting the
    category keeps the term active.
    """
    gated = category is None or category in cfg.upright_categories
    out = _single(pose, corr, cams, sym, np.asarray(world_up, dtype=np.float64), up_gated=gated,
                  alpha=cfg.alpha, beta=cfg.beta, front_margin=cfg.front_margin)
    return float(out["total"][0])
