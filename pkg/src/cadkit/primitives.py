"""Procedural primitive meshes (boxes, prisms, extrusions) for tests and the synthetic harness.

All primitives are centered at the origin with +y as the up-axis, matching
the canonical CAD convention used by the rest of the toolkit.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh


def _extrude_polygon(footprint: np.ndarray, height: float, model_id: str = "", category: str = "") -> TriangleMesh:
    """Extrude a CCW polygon in the x/z plane along y, centered vertically.

    Caps are fan-triangulated, so the footprint must be convex or
    star-shaped around vertex 0 (true for every generator below, which
    fan around an interior-visible corner).
    """
    fp = np.asarray(footprint, dtype=np.float64)
    n = fp.shape[0]
    y0, y1 = -height / 2.0, height / 2.0
    bottom = np.column_stack([fp[:, 0], np.full(n, y0), fp[:, 1]])
    top = np.column_stack([fp[:, 0], np.full(n, y1), fp[:, 1]])
    vertices = np.vstack([bottom, top])

    tris: list[tuple[int, int, int]] = []
    for k in range(1, n - 1):  # caps
        tris.append((0, k + 1, k))          # bottom, facing -y
        tris.append((n, n + k, n + k + 1))  # top, facing +y
    for k in range(n):  # sides
        a, b = k, (k + 1) % n
        tris.append((a, b, n + b))
        tris.append((a, n + b, n + a))
    return TriangleMesh(vertices=vertices, triangles=np.array(tris), model_id=model_id, category=category)


def box(size_x: float = 1.0, size_y: float = 1.0, size_z: float = 1.0, **kw) -> TriangleMesh:
    """Axis-aligned box. Footprint size_x by size_z, height size_y."""
    hx, hz = size_x / 2.0, size_z / 2.0
    fp = np.array([[-hx, -hz], [hx, -hz], [hx, hz], [-hx, hz]])
    return _extrude_polygon(fp, size_y, **kw)


def ngon_prism(n_sides: int, radius: float = 0.5, height: float = 1.0, **kw) -> TriangleMesh:
    """Regular n-gon prism about the y axis (a 72-gon approximates a cylinder)."""
    ang = 2 * np.pi * np.arange(n_sides) / n_sides
    fp = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    return _extrude_polygon(fp, height, **kw)


def l_extrusion(size: float = 1.0, height: float = 1.0, arm: float = 0.4, **kw) -> TriangleMesh:
    """Asymmetric L-shaped extrusion; has no rotational symmetry about y."""
    s, a = size / 2.0, arm
    # L footprint, CCW, fanned around the re-entrant corner (vertex 0),
    # from which the whole footprint is visible
    fp = np.array(
        [
            [-s + a, -s + a],
            [-s + a, s],
            [-s, s],
            [-s, -s],
            [s, -s],
            [s, -s + a],
        ]
    )
    fp = fp - fp.mean(axis=0)
    return _extrude_polygon(fp, height, **kw)


def tapered_wedge(size: float = 1.0, height: float = 1.0, **kw) -> TriangleMesh:
    """Scalene wedge; asymmetric about every axis."""
    s = size / 2.0
    fp = np.array([[-s, -s], [s, -s], [0.3 * s, 0.8 * s]])
    return _extrude_polygon(fp, height, **kw)
