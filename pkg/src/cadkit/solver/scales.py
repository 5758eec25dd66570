"""Anisotropic scale parameterizations for pose fitting.

Scale is always stored as exponentials of free parameters, so every
mode keeps S positive by construction:

- full: three independent parameters.
- coplanar_2dof: correspondences lie on a plane orthogonal to one
  canonical model axis; that axis's scale is unobservable from the
  annotated points and is tied to the mean of the other two.
- rotsym_tied: for near-continuous rotational symmetry the two scales
  perpendicular to the up-axis are indistinguishable and share one
  parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import fit_plane
from ..mesh import SymmetryClass

AXIS_SNAP_DEG = 15.0

FULL = "full"
COPLANAR_2DOF = "coplanar_2dof"
ROTSYM_TIED = "rotsym_tied"


@dataclass(frozen=True)
class ScaleParameterization:
    mode: str  # full | coplanar_2dof | rotsym_tied
    axis: int  # coplanar: plane-normal axis; rotsym: up axis; full: -1
    underdetermined: bool = False
    note: str = ""


def scale_parameterization(p_model: np.ndarray, sym: SymmetryClass, mesh_up: np.ndarray) -> ScaleParameterization:
    """Choose the scale mode for a set of annotated model points.

    36-way symmetric objects always tie the two non-up scales. Otherwise
    points lying on a plane whose normal is within AXIS_SNAP_DEG of a
    canonical model axis switch that axis to the tied 2-DoF mode. Fewer
    than 3 distinct points cannot support a plane test and fall back to
    full, flagged underdetermined.
    """
    p = np.asarray(p_model, dtype=np.float64).reshape(-1, 3)
    if sym.order == 36:
        up = int(np.argmax(np.abs(np.asarray(mesh_up))))
        return ScaleParameterization(ROTSYM_TIED, up)
    distinct = np.unique(p, axis=0)
    if distinct.shape[0] < 3:
        return ScaleParameterization(FULL, -1, underdetermined=True,
                                     note="fewer than 3 distinct model points")
    fit, coplanar = fit_plane(p)
    if fit.is_degenerate or not coplanar:
        return ScaleParameterization(FULL, -1)
    dots = np.abs(fit.normal)
    axis = int(np.argmax(dots))
    if dots[axis] < np.cos(np.deg2rad(AXIS_SNAP_DEG)):
        return ScaleParameterization(FULL, -1,
                                     note="coplanar but normal snaps to no canonical axis")
    return ScaleParameterization(COPLANAR_2DOF, axis)


def expand_scales(u: np.ndarray, param: ScaleParameterization) -> np.ndarray:
    """Map free parameters (B, 3) to per-axis scales (B, 3).

    Unused components of u are ignored (kept at zero by the optimizer
    since their gradient is exactly zero).
    """
    e = np.exp(u)
    if param.mode == FULL:
        return e
    if param.mode == ROTSYM_TIED:
        s = np.empty_like(e)
        others = [i for i in range(3) if i != param.axis]
        s[..., others[0]] = e[..., 0]
        s[..., others[1]] = e[..., 0]
        s[..., param.axis] = e[..., 1]
        return s
    if param.mode == COPLANAR_2DOF:
        s = np.empty_like(e)
        others = [i for i in range(3) if i != param.axis]
        s[..., others[0]] = e[..., 0]
        s[..., others[1]] = e[..., 1]
        s[..., param.axis] = 0.5 * (e[..., 0] + e[..., 1])
        return s
    raise ValueError(f"unknown scale mode {param.mode!r}")


def contract_scale_grad(u: np.ndarray, g_s: np.ndarray, param: ScaleParameterization) -> np.ndarray:
    """Pull the gradient w.r.t. S (B, 3) back to the free parameters."""
    e = np.exp(u)
    g = np.zeros_like(u)
    if param.mode == FULL:
        return g_s * e
    others = [i for i in range(3) if i != param.axis]
    if param.mode == ROTSYM_TIED:
        g[..., 0] = (g_s[..., others[0]] + g_s[..., others[1]]) * e[..., 0]
        g[..., 1] = g_s[..., param.axis] * e[..., 1]
        return g
    if param.mode == COPLANAR_2DOF:
        g[..., 0] = (g_s[..., others[0]] + 0.5 * g_s[..., param.axis]) * e[..., 0]
        g[..., 1] = (g_s[..., others[1]] + 0.5 * g_s[..., param.axis]) * e[..., 1]
        return g
    raise ValueError(f"unknown scale mode {param.mode!r}")


def scales_to_params(s: np.ndarray, param: ScaleParameterization) -> np.ndarray:
    """Free parameters that reproduce (or best approximate) given scales."""
    s = np.asarray(s, dtype=np.float64)
    u = np.zeros_like(s)
    if param.mode == FULL:
        return np.log(s)
    others = [i for i in range(3) if i != param.axis]
    if param.mode == ROTSYM_TIED:
        u[..., 0] = 0.5 * (np.log(s[..., others[0]]) + np.log(s[..., others[1]]))
        u[..., 1] = np.log(s[..., param.axis])
        return u
    if param.mode == COPLANAR_2DOF:
        u[..., 0] = np.log(s[..., others[0]])
        u[..., 1] = np.log(s[..., others[1]])
        return u
    raise ValueError(f"unknown scale mode {param.mode!r}")
