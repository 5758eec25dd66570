"""9-DoF pose estimation from 2D-3D correspondences."""

from .corresp import (
    CorrespondenceItem,
    CorrespondenceSet,
    dump_correspondences_json,
    load_correspondences_json,
    validate_correspondences,
)
from .engine import SolverError
from .losses import front_loss, reprojection_loss, total_loss, up_axis_loss
from .rotation import octahedral_rotations
from .scales import ScaleParameterization, scale_parameterization
from .solve import (
    DEFAULT_UPRIGHT,
    SolveResult,
    SolverConfig,
    dump_solve_result_json,
    estimate_pose,
    load_solve_result_json,
    verify_pose_proxy,
)

__all__ = [
    "CorrespondenceItem",
    "CorrespondenceSet",
    "DEFAULT_UPRIGHT",
    "ScaleParameterization",
    "SolveResult",
    "SolverConfig",
    "SolverError",
    "dump_correspondences_json",
    "dump_solve_result_json",
    "estimate_pose",
    "front_loss",
    "load_correspondences_json",
    "load_solve_result_json",
    "octahedral_rotations",
    "reprojection_loss",
    "scale_parameterization",
    "total_loss",
    "up_axis_loss",
    "validate_correspondences",
    "verify_pose_proxy",
]
