"""Cumulative solver ablations over a synthetic suite.

Each configuration step turns one solver capability on, on top of the
previous step: the coplanar scale tie, the symmetry-aware reprojection,
and the up-axis objective. run_ablation reports the fraction of objects
whose solved pose passes the pixel-residual verification proxy under
each configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..solver import SolverConfig, SolverError, estimate_pose, verify_pose_proxy
from .synthetic import SyntheticScene


class AblationError(ValueError):
    pass


@dataclass(frozen=True)
class AblationRow:
    label: str
    n_verified: int
    n_total: int

    @property
    def fraction(self) -> float:
        return self.n_verified / self.n_total if self.n_total else 0.0


def make_ablation_configs(base: SolverConfig | None = None) -> list[tuple[str, SolverConfig]]:
    """The four cumulative steps, derived from one base configuration.

    The base step runs with everything off (full 3-DoF scale, no
    symmetry handling, no up-axis term); later steps re-enable one
    capability each. The front-of-camera term stays on throughout, it
    is a feasibility guard rather than an ablation subject.
    """
    full = base if base is not None else SolverConfig()
    stripped = replace(full, alpha=0.0, enable_symmetry=False, enable_coplanar=False)
    return [
        ("base", stripped),
        ("+coplanar", replace(stripped, enable_coplanar=True)),
        ("+symmetry", replace(stripped, enable_coplanar=True, enable_symmetry=True)),
        ("+up-axis", replace(full, enable_coplanar=True, enable_symmetry=True)),
    ]


def run_ablation(
    configs: list[tuple[str, SolverConfig]],
    suite: SyntheticScene | list[SyntheticScene],
    tau_px: float = 5.0,
) -> list[AblationRow]:
    """Solve every object of the suite under every configuration."""
    scenes = [suite] if isinstance(suite, SyntheticScene) else list(suite)
    objects = [(s, o) for s in scenes for o in s.objects]
    if not objects:
        raise AblationError("empty suite")
    rows = []
    for label, cfg in configs:
        n_ok = 0
        for synth, obj in objects:
            cams = synth.cameras()
            try:
                res = estimate_pose(obj.corr, cams, obj.mesh, obj.sym, cfg)
            except SolverError:
                continue
            if verify_pose_proxy(res, tau_px):
                n_ok += 1
        rows.append(AblationRow(label=label, n_verified=n_ok, n_total=len(objects)))
    return rows


def ablation_csv(rows: list[AblationRow]) -> str:
    lines = ["config,verified,total,fraction"]
    for r in rows:
        lines.append(f"{r.label},{r.n_verified},{r.n_total},{r.fraction:.4f}")
    return "\n".join(lines) + "\n"
