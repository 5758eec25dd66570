"""Keyframe selection: annotation work concentrates on a few regularly
spaced frames instead of every frame of the video."""

from __future__ import annotations

import numpy as np

from ..tracking import Track


def spaced_frame_ids(frame_ids: list[int], k: int) -> list[int]:
    """k entries regularly spaced over an ordered id list, deduplicated.

    k=1 picks the middle entry. Shorter lists are returned whole.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = len(frame_ids)
    if n == 0:
        raise ValueError("frame id list is empty")
    if n <= k:
        return list(frame_ids)
    if k == 1:
        return [frame_ids[(n - 1) // 2]]
    idx = np.round(np.linspace(0, n - 1, k)).astype(int)
    out = []
    for i in idx:
        fid = frame_ids[int(i)]
        if not out or out[-1] != fid:
            out.append(fid)
    return out


def select_keyframes(track: Track, k: int = 6) -> list[int]:
    """Regularly spaced keyframes over the span of a track."""
    return spaced_frame_ids(track.frame_ids(), k)
