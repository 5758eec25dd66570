"""Dataset plumbing: scene records, keyframes, annotation-task state
machine, per-scene statistics, and the synthetic benchmark harness."""

from .scene_io import Scene, SceneError, SceneFrame, load_scene, save_scene
from .keyframes import select_keyframes, spaced_frame_ids
from .tasks import (
    PAYLOAD_KINDS,
    STAGES,
    TERMINAL_STAGES,
    AnnotationTask,
    InvalidTransition,
    PayloadError,
    TaskError,
    TaskStore,
    VersionConflict,
    advance_task,
)
from .stats import SceneStats, StatsError, compute_scene_stats, stats_csv
from .synthetic import (
    SyntheticObject,
    SyntheticScene,
    SyntheticSpec,
    generate_synthetic_scene,
    pose_error,
    scene_diameter,
)
from .ablation import AblationRow, ablation_csv, make_ablation_configs, run_ablation
from .render import render_frame, render_scene_frames

__all__ = [
    "AblationRow",
    "PAYLOAD_KINDS",
    "AnnotationTask",
    "InvalidTransition",
    "PayloadError",
    "STAGES",
    "Scene",
    "SceneError",
    "SceneFrame",
    "SceneStats",
    "StatsError",
    "SyntheticObject",
    "SyntheticScene",
    "SyntheticSpec",
    "TERMINAL_STAGES",
    "TaskError",
    "TaskStore",
    "VersionConflict",
    "ablation_csv",
    "advance_task",
    "compute_scene_stats",
    "generate_synthetic_scene",
    "load_scene",
    "make_ablation_configs",
    "pose_error",
    "render_frame",
    "render_scene_frames",
    "run_ablation",
    "save_scene",
    "scene_diameter",
    "select_keyframes",
    "spaced_frame_ids",
    "stats_csv",
]
