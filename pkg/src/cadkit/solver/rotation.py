"""Continuous 6D rotation parameterization and discrete rotation starts.

A rotation is represented by two free 3-vectors (a, b): a normalizes to
the first column, b is made orthonormal to it by Gram-Schmidt, and the
third column is their cross product. The map is smooth and surjective
with no gimbal lock, so gradient descent can run on (a, b) directly.
All functions are batched: leading axis = batch.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def sixd_to_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(B, 3) x 2 -> (B, 3, 3) with columns [x, y, z]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = a / np.maximum(np.linalg.norm(a, axis=-1, keepdims=True), _EPS)
    yp = b - np.sum(x * b, axis=-1, keepdims=True) * x
    y = yp / np.maximum(np.linalg.norm(yp, axis=-1, keepdims=True), _EPS)
    z = np.cross(x, y)
    return np.stack([x, y, z], axis=-1)


def sixd_backward(a: np.ndarray, b: np.ndarray, g_R: np.ndarray):
    """Gradients of a scalar loss w.r.t. (a, b) given dL/dR.

    Recomputes the forward chain and pushes g_R back through the cross
    product, the two normalizations, and the Gram-Schmidt projection.
    Returns (g_a, g_b), each (B, 3).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.maximum(np.linalg.norm(a, axis=-1, keepdims=True), _EPS)
    x = a / na
    s = np.sum(x * b, axis=-1, keepdims=True)
    yp = b - s * x
    nyp = np.maximum(np.linalg.norm(yp, axis=-1, keepdims=True), _EPS)
    y = yp / nyp

    g_x_col = g_R[..., :, 0]
    g_y_col = g_R[..., :, 1]
    g_z = g_R[..., :, 2]

    # z = x cross y
    g_x = g_x_col + np.cross(y, g_z)
    g_y = g_y_col + np.cross(g_z, x)

    # y = yp / |yp|
    g_yp = (g_y - np.sum(y * g_y, axis=-1, keepdims=True) * y) / nyp

    # yp = b - (x.b) x
    g_b = g_yp - np.sum(x * g_yp, axis=-1, keepdims=True) * x
    g_x = g_x - np.sum(x * g_yp, axis=-1, keepdims=True) * b - s * g_yp

    # x = a / |a|
    g_a = (g_x - np.sum(x * g_x, axis=-1, keepdims=True) * x) / na
    return g_a, g_b


def matrix_to_sixd(R: np.ndarray):
    """Exact 6D coordinates for a rotation: its first two columns."""
    R = np.asarray(R, dtype=np.float64)
    return R[..., :, 0].copy(), R[..., :, 1].copy()


def octahedral_rotations() -> np.ndarray:
    """The 24 rotations of the chiral octahedral group, identity first.

    Signed permutation matrices with determinant +1, deterministically
    ordered, used as the default multi-start rotation grid.
    """
    from itertools import permutations, product

    mats = []
    for perm in permutations(range(3)):
        for signs in product((1.0, -1.0), repeat=3):
            m = np.zeros((3, 3))
            for row, col in enumerate(perm):
                m[row, col] = signs[row]
            if np.linalg.det(m) > 0.5:
                mats.append(m)
    mats.sort(key=lambda m: tuple(-m.reshape(-1)))
    eye = next(i for i, m in enumerate(mats) if np.array_equal(m, np.eye(3)))
    mats.insert(0, mats.pop(eye))
    return np.stack(mats)
