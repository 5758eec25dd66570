"""Associate per-frame detections into object tracks.

Detections (boxes + appearance descriptors, produced upstream) are
clustered across frames by greedy agglomerative clique partitioning:
merge the cluster pair with the largest positive gain, where the gain of
a merge is the sum over cross pairs of (similarity - theta), under the
hard constraint that a track holds at most one detection per frame.
"""

from __future__ import annotations

import json
import uuid
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

DEFAULT_WEIGHTS = (1.0, 0.5, 0.5)  # appearance, category, spatial continuity
DEFAULT_THETA = 0.6
ORACLE_MAX_DETECTIONS = 10


class TrackingError(ValueError):
    pass


@dataclass(frozen=True)
class Detection:
    frame_id: int
    box: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max
    category: str
    score: float
    descriptor: np.ndarray  # unit norm

    def __post_init__(self):
        box = tuple(float(v) for v in self.box)
        x0, y0, x1, y1 = box
        if not (x0 < x1 and y0 < y1):
            raise TrackingError(f"degenerate box {box}")
        d = np.asarray(self.descriptor, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(d) - 1.0) > 1e-6:
            raise TrackingError("descriptor must be unit norm")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "descriptor", d)


@dataclass
class Track:
    track_id: str
    detections: list[Detection]  # at most one per frame, ordered by frame
    category: str = ""
    source: str = "automatic"  # automatic | manual

    def __post_init__(self):
        if not self.detections:
            raise TrackingError("track must contain at least one detection")
        frames = [d.frame_id for d in self.detections]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise TrackingError("track frame_ids must be strictly increasing")
        if not self.category:
            self.category = Counter(d.category for d in self.detections).most_common(1)[0][0]

    def frame_ids(self) -> list[int]:
        return [d.frame_id for d in self.detections]


def box_iou(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def pairwise_similarity(a: Detection, b: Detection, weights=DEFAULT_WEIGHTS) -> float:
    """Weighted sum of appearance cosine, category match, and adjacent-frame IoU."""
    if a.frame_id == b.frame_id:
        raise TrackingError("detections in the same frame are never compared for merging")
    w_app, w_cat, w_spatial = weights
    sim = w_app * float(a.descriptor @ b.descriptor)
    sim += w_cat * (1.0 if a.category == b.category else 0.0)
    if abs(a.frame_id - b.frame_id) == 1:
        sim += w_spatial * box_iou(a.box, b.box)
    return sim


def _similarity_matrix(detections: list[Detection], weights) -> np.ndarray:
    n = len(detections)
    sim = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        if detections[i].frame_id == detections[j].frame_id:
            continue  # never merged; value irrelevant
        sim[i, j] = sim[j, i] = pairwise_similarity(detections[i], detections[j], weights)
    return sim


def _partition_objective(groups: list[list[int]], sim: np.ndarray, theta: float) -> float:
    total = 0.0
    for g in groups:
        for i, j in combinations(g, 2):
            total += sim[i, j] - theta
    return total


def _make_tracks(detections: list[Detection], groups: list[list[int]], prefix: str) -> list[Track]:
    # deterministic output order: by smallest detection index in each group
    tracks = []
    for k, g in enumerate(sorted(groups, key=min)):
        dets = sorted((detections[i] for i in g), key=lambda d: d.frame_id)
        tracks.append(Track(track_id=f"{prefix}{k:04d}", detections=dets))
    return tracks


def partition_tracks(
    detections: list[Detection],
    weights=DEFAULT_WEIGHTS,
    theta: float = DEFAULT_THETA,
    track_id_prefix: str = "track_",
) -> list[Track]:
    """Greedy agglomerative clique partitioning of detections into tracks.

    Starts from singletons and repeatedly applies the merge with the
    largest positive gain sum(sim - theta) over cross pairs, skipping
    merges that would put two detections of one frame in the same track.
    Ties break on the lowest detection indices involved, so the result is
    deterministic in the input order.
    """
    n = len(detections)
    if n == 0:
        return []
    sim = _similarity_matrix(detections, weights)
    gain = sim - theta

    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    frames: dict[int, set[int]] = {i: {detections[i].frame_id} for i in range(n)}
    # cross-cluster merge gains; entry (a, b) with a < b
    pair_gain: dict[tuple[int, int], float] = {
        (i, j): gain[i, j]
        for i, j in combinations(range(n), 2)
        if detections[i].frame_id != detections[j].frame_id
    }

    while True:
        best_key = None
        best_gain = 0.0
        for (a, b), g in pair_gain.items():
            if g <= 0 or frames[a] & frames[b]:
                continue
            if g > best_gain or (
                g == best_gain
                and best_key is not None
                and (min(clusters[a]), min(clusters[b])) < (min(clusters[best_key[0]]), min(clusters[best_key[1]]))
            ):
                best_key = (a, b)
                best_gain = g
        if best_key is None:
            break
        a, b = best_key
        clusters[a] = sorted(clusters[a] + clusters[b])
        frames[a] |= frames[b]
        del clusters[b], frames[b]
        # fold b's gains into a
        for c in list(clusters):
            if c == a:
                continue
            ka = (min(a, c), max(a, c))
            kb = (min(b, c), max(b, c))
            if kb in pair_gain:
                pair_gain[ka] = pair_gain.get(ka, 0.0) + pair_gain.pop(kb)
        pair_gain = {k: v for k, v in pair_gain.items() if b not in k}

    groups = _refine_partition(list(clusters.values()), detections, gain)
    return _make_tracks(detections, groups, track_id_prefix)


def _refine_partition(groups, detections, gain, max_chain: int = 16):
    """Polish a partition with chains of single-detection moves and swaps.

    The pair-merge construction can lock in the heaviest merge when two
    lighter merges would have scored more together (the heaviest pair
    blocks them through the one-per-frame constraint). To escape such
    local optima this runs a variable-depth search: build a chain of
    locally best relocations where intermediate steps may lose value,
    each detection moving at most once per chain, then commit the chain
    prefix with the best positive total. Deterministic throughout; ties
    break on the lowest indices involved.

    For large inputs the chain depth drops to 1 (plain best-improvement
    moves) to keep the quadratic swap scan off the hot path.
    """
    n = len(detections)
    if n <= 1 or not groups:
        return [sorted(g) for g in groups]
    gain = gain.copy()
    np.fill_diagonal(gain, 0.0)
    det_frame = [d.frame_id for d in detections]
    use_swaps = n <= 60
    if n > 60:
        max_chain = 1
    groups = [sorted(g) for g in groups]

    def apply_op(gs, frames, joins, op):
        # structural update; joins may be None during replay
        kind = op[0]
        if kind == "move":
            _, i, src, dst = op
            gs[src].remove(i)
            frames[src].discard(det_frame[i])
            if dst == -1:
                gs.append([i])
                frames.append({det_frame[i]})
                if joins is not None:
                    joins.append(gain[:, i].copy())
            else:
                gs[dst].append(i)
                frames[dst].add(det_frame[i])
            if joins is not None:
                joins[src] = joins[src] - gain[:, i]
                if dst != -1:
                    joins[dst] = joins[dst] + gain[:, i]
        else:
            _, i, j, a, b = op
            gs[a].remove(i)
            gs[b].remove(j)
            gs[a].append(j)
            gs[b].append(i)
            frames[a] = {det_frame[k] for k in gs[a]}
            frames[b] = {det_frame[k] for k in gs[b]}
            if joins is not None:
                joins[a] = joins[a] - gain[:, i] + gain[:, j]
                joins[b] = joins[b] - gain[:, j] + gain[:, i]

    def candidate_ops(gs, frames, joins, locked, forbidden):
        # forbidden: cluster compositions dissolved earlier in this chain;
        # recreating one would walk the chain back over its own steps
        found = []  # (delta, key, op)
        for src, g in enumerate(gs):
            for i in g:
                if i in locked:
                    continue
                out = -joins[src][i]
                fi = det_frame[i]
                for dst in range(len(gs)):
                    if dst == src or not gs[dst] or fi in frames[dst]:
                        continue
                    if forbidden and frozenset(gs[dst]) | {i} in forbidden:
                        continue
                    found.append((out + joins[dst][i], (0, i, src, dst), ("move", i, src, dst)))
                if len(g) > 1 and not (forbidden and frozenset((i,)) in forbidden):
                    found.append((out, (0, i, src, n + 1), ("move", i, src, -1)))
        if use_swaps:
            for a in range(len(gs)):
                for b in range(a + 1, len(gs)):
                    if not gs[a] or not gs[b]:
                        continue
                    for i in gs[a]:
                        if i in locked:
                            continue
                        fi = det_frame[i]
                        for j in gs[b]:
                            if j in locked:
                                continue
                            fj = det_frame[j]
                            if fi != fj and (fi in frames[b] or fj in frames[a]):
                                continue
                            if forbidden and (
                                (frozenset(gs[a]) - {i}) | {j} in forbidden
                                or (frozenset(gs[b]) - {j}) | {i} in forbidden
                            ):
                                continue
                            delta = joins[b][i] + joins[a][j] - joins[a][i] - joins[b][j] - 2.0 * gain[i, j]
                            found.append((delta, (1, min(i, j), max(i, j), a, b), ("swap", i, j, a, b)))
        found.sort(key=lambda t: (-t[0], t[1]))
        return found

    def record_op(work, locked, forbidden, op):
        if op[0] == "move":
            forbidden.add(frozenset(work[op[2]]))
            locked.add(op[1])
        else:
            forbidden.add(frozenset(work[op[3]]))
            forbidden.add(frozenset(work[op[4]]))
            locked.add(op[1])
            locked.add(op[2])

    def build_chain(seed_idx):
        """Run one chain; seed_idx picks the first op from the sorted candidates.

        Returns (best_prefix_gain, committed_ops)."""
        work = [list(g) for g in groups]
        frames = [{det_frame[i] for i in g} for g in work]
        joins = [gain[:, g].sum(axis=1) for g in work]
        locked: set[int] = set()
        forbidden: set[frozenset] = set()
        cum = 0.0
        best_prefix = 0.0
        best_len = 0
        ops = []
        while len(ops) < max_chain:
            cands = candidate_ops(work, frames, joins, locked, forbidden)
            pick = seed_idx if not ops else 0
            if pick >= len(cands):
                break
            delta, _, op = cands[pick]
            record_op(work, locked, forbidden, op)
            apply_op(work, frames, joins, op)
            cum += delta
            ops.append(op)
            if cum > best_prefix + 1e-9:
                best_prefix = cum
                best_len = len(ops)
        return best_prefix, ops[:best_len]

    n_seeds = 8 if n <= 60 else 1
    while True:
        committed = None
        for seed_idx in range(n_seeds):
            gain_found, ops = build_chain(seed_idx)
            if gain_found > 1e-9:
                committed = ops
                break
        if committed is None:
            break
        frames = [{det_frame[i] for i in g} for g in groups]
        for op in committed:
            apply_op(groups, frames, None, op)
    return [sorted(g) for g in groups if g]


def exact_partition_oracle(
    detections: list[Detection],
    weights=DEFAULT_WEIGHTS,
    theta: float = DEFAULT_THETA,
) -> list[Track]:
    """Exhaustive best partition under the same objective and frame constraint.

    Test oracle; refuses instances larger than ORACLE_MAX_DETECTIONS.
    """
    n = len(detections)
    if n > ORACLE_MAX_DETECTIONS:
        raise TrackingError(f"oracle limited to {ORACLE_MAX_DETECTIONS} detections, got {n}")
    if n == 0:
        return []
    sim = _similarity_matrix(detections, weights)

    best_groups: list[list[int]] | None = None
    best_val = -np.inf

    def recurse(idx: int, groups: list[list[int]], group_frames: list[set[int]], value: float):
        nonlocal best_groups, best_val
        if idx == n:
            if value > best_val:
                best_val = value
                best_groups = [list(g) for g in groups]
            return
        f = detections[idx].frame_id
        for gi, g in enumerate(groups):
            if f in group_frames[gi]:
                continue
            added = sum(sim[idx, j] - theta for j in g)
            g.append(idx)
            group_frames[gi].add(f)
            recurse(idx + 1, groups, group_frames, value + added)
            g.pop()
            group_frames[gi].remove(f)
        groups.append([idx])
        group_frames.append({f})
        recurse(idx + 1, groups, group_frames, value)
        groups.pop()
        group_frames.pop()

    recurse(0, [], [], 0.0)
    assert best_groups is not None
    return _make_tracks(detections, best_groups, "oracle_")


def partition_objective(tracks: list[Track], detections: list[Detection], weights=DEFAULT_WEIGHTS, theta: float = DEFAULT_THETA) -> float:
    """Objective value of a partition, for comparing greedy against the oracle."""
    index = {id(d): i for i, d in enumerate(detections)}
    sim = _similarity_matrix(detections, weights)
    groups = [[index[id(d)] for d in t.detections] for t in tracks]
    return _partition_objective(groups, sim, theta)


def load_detections_jsonl(text: str) -> list[Detection]:
    """One Detection per line: frame_id, box, category, score, descriptor."""
    detections = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            detections.append(
                Detection(
                    frame_id=int(rec["frame_id"]),
                    box=tuple(float(v) for v in rec["box"]),
                    category=str(rec["category"]),
                    score=float(rec.get("score", 1.0)),
                    descriptor=np.array(rec["descriptor"], dtype=np.float64),
                )
            )
        except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise TrackingError(f"detections line {line_no}: {exc}") from exc
    return detections


def dump_tracks_json(tracks: list[Track]) -> str:
    recs = [
        {
            "track_id": t.track_id,
            "category": t.category,
            "source": t.source,
            "detections": [
                {
                    "frame_id": d.frame_id,
                    "box": list(d.box),
                    "category": d.category,
                    "score": d.score,
                    "descriptor": [float(x) for x in d.descriptor],
                }
                for d in t.detections
            ],
        }
        for t in tracks
    ]
    return json.dumps({"tracks": recs}, indent=2, sort_keys=True)


def load_tracks_json(text: str) -> list[Track]:
    data = json.loads(text)
    tracks = []
    for rec in data["tracks"]:
        dets = [
            Detection(
                frame_id=int(d["frame_id"]),
                box=tuple(float(v) for v in d["box"]),
                category=str(d["category"]),
                score=float(d.get("score", 1.0)),
                descriptor=np.array(d["descriptor"], dtype=np.float64),
            )
            for d in rec["detections"]
        ]
        tracks.append(
            Track(
                track_id=rec["track_id"],
                detections=dets,
                category=rec.get("category", ""),
                source=rec.get("source", "automatic"),
            )
        )
    return tracks


def manual_track(detections: list[Detection], track_id: str | None = None) -> Track:
    """Build a manually-annotated track (bypasses partitioning)."""
    dets = sorted(detections, key=lambda d: d.frame_id)
    return Track(
        track_id=track_id or f"manual_{uuid.uuid4().hex[:8]}",
        detections=dets,
        source="manual",
    )
