"""Rank CAD models for a track by appearance and category similarity.

Each database model carries descriptors of 10 precomputed viewpoints.
A track is scored against a model as the mean, over all (frame
descriptor, view descriptor) pairs, of the appearance cosine gated by
the category-label similarity. Descriptor extraction itself happens
offline; this module only consumes the vectors.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Protocol

import numpy as np

N_VIEWS = 10
MAX_CANDIDATES = 10
UNIT_TOL = 1e-6


class RetrievalError(ValueError):
    pass


def _check_unit(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise RetrievalError(f"{what} must be unit norm")
    return v


@dataclass(frozen=True)
class ModelViewDescriptors:
    model_id: str
    category: str
    view_descriptors: np.ndarray  # (10, d), rows unit norm

    def __post_init__(self):
        vd = np.asarray(self.view_descriptors, dtype=np.float64)
        if vd.ndim != 2 or vd.shape[0] != N_VIEWS:
            raise RetrievalError(f"expected {N_VIEWS} view descriptors, got shape {vd.shape}")
        norms = np.linalg.norm(vd, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise RetrievalError("view descriptors must be unit norm")
        object.__setattr__(self, "view_descriptors", vd)


@dataclass(frozen=True)
class CandidateList:
    track_id: str
    entries: tuple[tuple[str, float], ...]  # (model_id, score), descending

    def __post_init__(self):
        if len(self.entries) > MAX_CANDIDATES:
            raise RetrievalError(f"at most {MAX_CANDIDATES} candidates, got {len(self.entries)}")
        scores = [s for _, s in self.entries]
        if any(b > a + 1e-12 for a, b in zip(scores, scores[1:])):
            raise RetrievalError("candidate scores must be non-increasing")


class EmbeddingProvider(Protocol):
    def embed(self, label: str) -> np.ndarray:
        """Unit-norm vector for a category label; deterministic."""
        ...


class HashEmbeddingProvider:
    """Deterministic stand-in embedder: hash-seeded random unit vectors.

    Same label always maps to the same vector; distinct labels land
    nearly orthogonal in high dimension. Carries no semantics, which is
    exactly what repeatable tests want.
    """

    def __init__(self, dim: int = 64):
        if dim < 2:
            raise RetrievalError("embedding dim must be >= 2")
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, label: str) -> np.ndarray:
        if not label:
            raise RetrievalError("label must be non-empty")
        v = self._cache.get(label)
        if v is None:
            seed = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")
            rng = np.random.default_rng(seed)
            v = rng.normal(size=self.dim)
            v /= np.linalg.norm(v)
            self._cache[label] = v
        return v


class TableEmbeddingProvider:
    """Embedder backed by an explicit label -> vector table.

    Lets callers encode known semantic relations (near-synonym labels as
    nearby vectors) without any learned model in the loop.
    """

    def __init__(self, table: dict[str, np.ndarray]):
        self._table = {k: _check_unit(v, f"embedding for {k!r}") for k, v in table.items()}

    def embed(self, label: str) -> np.ndarray:
        try:
            return self._table[label]
        except KeyError:
            raise RetrievalError(f"no embedding for label {label!r}") from None


def category_similarity(a: str, b: str, emb: EmbeddingProvider) -> float:
    """Cosine between two label embeddings, in [-1, 1]."""
    if not a or not b:
        raise RetrievalError("labels must be non-empty")
    if a == b:
        return 1.0
    return float(np.clip(emb.embed(a) @ emb.embed(b), -1.0, 1.0))


def combined_similarity(app: float, cat: float) -> float:
    """Appearance cosine gated by category similarity: max(app, 0) * cat.

    Flooring at zero keeps two negative cosines from multiplying into a
    confident score.
    """
    return max(app, 0.0) * cat


def track_model_score(
    track_descs,
    track_category: str,
    model: ModelViewDescriptors,
    emb: EmbeddingProvider,
    aggregation: str = "mean",
) -> float:
    """Score a track against one model over all descriptor pairs.

    The category gate is constant across pairs, so the reduction runs
    over the appearance cosines of every (frame, view) pair.
    aggregation is "mean" (default) or "max".
    """
    descs = np.asarray(track_descs, dtype=np.float64)
    if descs.ndim == 1:
        descs = descs[None, :]
    if descs.shape[0] < 1:
        raise RetrievalError("need at least one track descriptor")
    if aggregation not in ("mean", "max"):
        raise RetrievalError(f"unknown aggregation {aggregation!r}")
    cat = max(category_similarity(track_category, model.category, emb), 0.0)
    cos = descs @ model.view_descriptors.T  # (n_frames, 10)
    gated = np.maximum(cos, 0.0) * cat
    return float(gated.mean() if aggregation == "mean" else gated.max())


def rank_candidates(
    track_id: str,
    track_descs,
    track_category: str,
    database: list[ModelViewDescriptors],
    emb: EmbeddingProvider,
    aggregation: str = "mean",
) -> CandidateList:
    """Top MAX_CANDIDATES models by score, ties broken by model_id."""
    if not database:
        raise RetrievalError("database must be non-empty")
    scored = [
        (track_model_score(track_descs, track_category, m, emb, aggregation), m.model_id)
        for m in database
    ]
    scored.sort(key=lambda t: (-t[0], t[1]))
    entries = tuple((mid, s) for s, mid in scored[:MAX_CANDIDATES])
    return CandidateList(track_id=track_id, entries=entries)


def load_descriptor_db_jsonl(text: str) -> list[ModelViewDescriptors]:
    """One ModelViewDescriptors per line: model_id, category, view_descriptors."""
    models = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            models.append(
                ModelViewDescriptors(
                    model_id=str(rec["model_id"]),
                    category=str(rec["category"]),
                    view_descriptors=np.array(rec["view_descriptors"], dtype=np.float64),
                )
            )
        except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
            raise RetrievalError(f"descriptor db line {line_no}: {exc}") from exc
    return models


def dump_descriptor_db_jsonl(models: list[ModelViewDescriptors]) -> str:
    lines = [
        json.dumps(
            {
                "model_id": m.model_id,
                "category": m.category,
                "view_descriptors": [[float(x) for x in row] for row in m.view_descriptors],
            }
        )
        for m in models
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def dump_candidates_json(c: CandidateList) -> str:
    return json.dumps(
        {
            "track_id": c.track_id,
            "entries": [{"model_id": mid, "score": float(s)} for mid, s in c.entries],
        },
        indent=2,
        sort_keys=True,
    )


def load_candidates_json(text: str) -> CandidateList:
    data = json.loads(text)
    return CandidateList(
        track_id=data["track_id"],
        entries=tuple((e["model_id"], float(e["score"])) for e in data["entries"]),
    )
