"""Annotation-task state machine with a durable write-ahead journal.

Every track flows through the same stages:

    TRACKED -> CAD_SELECTED -> CORRESPONDED -> POSED -> VERIFIED_OK
            \\-> REJECTED_NO_MATCH                   \\-> VERIFIED_BAD

Writes are optimistic: a submission names the version it saw, stale
submissions are rejected without touching state. Accepted transitions
are appended to a JSONL journal and fsynced before the caller is told
they succeeded, so an acknowledged write survives a crash. Restart
replays snapshot + journal; a torn trailing line (the crash case) is
ignored.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

STAGES = (
    "TRACKED",
    "CAD_SELECTED",
    "REJECTED_NO_MATCH",
    "CORRESPONDED",
    "POSED",
    "VERIFIED_OK",
    "VERIFIED_BAD",
)
TERMINAL_STAGES = frozenset({"REJECTED_NO_MATCH", "VERIFIED_OK", "VERIFIED_BAD"})
PAYLOAD_KINDS = ("choice", "no_match", "correspondences", "solve", "verdict")

# (stage, payload kind) -> next stage; verdict resolves to OK/BAD below
_GRAPH = {
    ("TRACKED", "choice"): "CAD_SELECTED",
    ("TRACKED", "no_match"): "REJECTED_NO_MATCH",
    ("CAD_SELECTED", "correspondences"): "CORRESPONDED",
    ("CORRESPONDED", "solve"): "POSED",
    ("POSED", "verdict"): None,
}


class TaskError(ValueError):
    pass


class InvalidTransition(TaskError):
    pass


class VersionConflict(TaskError):
    pass


class PayloadError(TaskError):
    pass


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    track_id: str
    stage: str = "TRACKED"
    version: int = 1
    model_id: str = ""  # set when a CAD candidate is chosen

    def __post_init__(self):
        if self.stage not in STAGES:
            raise TaskError(f"unknown stage {self.stage!r}")
        if self.version < 1:
            raise TaskError("version must be >= 1")

    @property
    def terminal(self) -> bool:
        return self.stage in TERMINAL_STAGES


def _validate_payload(payload) -> str:
    """Shape-check a payload and return its kind."""
    if not isinstance(payload, dict):
        raise PayloadError("payload must be an object")
    kind = payload.get("kind")
    if kind not in PAYLOAD_KINDS:
        raise PayloadError(f"payload kind must be one of {PAYLOAD_KINDS}, got {kind!r}")
    if kind == "choice":
        idx = payload.get("index")
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise PayloadError("choice payload needs a non-negative integer 'index'")
    elif kind == "correspondences":
        data = payload.get("data")
        if not isinstance(data, dict) or not data.get("items"):
            raise PayloadError("correspondences payload needs 'data' with non-empty 'items'")
    elif kind == "verdict":
        if not isinstance(payload.get("ok"), bool):
            raise PayloadError("verdict payload needs a boolean 'ok'")
    return kind


def advance_task(task: AnnotationTask, payload: dict) -> AnnotationTask:
    """Pure transition: returns the task at its next stage, version + 1.

    Raises InvalidTransition when the payload kind is not legal at the
    task's current stage (terminal stages accept nothing), PayloadError
    when the payload itself is malformed.
    """
    kind = _validate_payload(payload)
    key = (task.stage, kind)
    if key not in _GRAPH:
        raise InvalidTransition(
            f"cannot apply {kind!r} at stage {task.stage} (task {task.task_id})"
        )
    nxt = _GRAPH[key]
    if nxt is None:  # verdict
        nxt = "VERIFIED_OK" if payload["ok"] else "VERIFIED_BAD"
    model_id = task.model_id
    if kind == "choice" and payload.get("model_id"):
        model_id = str(payload["model_id"])
    return replace(task, stage=nxt, version=task.version + 1, model_id=model_id)


class TaskStore:
    """Task records kept in memory, made durable by snapshot + journal.

    The journal is append-only JSONL, one record per accepted write.
    compact() folds it into a snapshot. Assignment order for
    next_open() is task creation order (FIFO per stage).
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.root / "journal.jsonl"
        self.snapshot_path = self.root / "snapshot.json"
        self._tasks: dict[str, AnnotationTask] = {}
        self._order: list[str] = []
        self._replay()
        self._journal = open(self.journal_path, "a", encoding="utf-8")

    # -- durability ---------------------------------------------------

    def _append(self, record: dict) -> None:
        self._journal.write(json.dumps(record, sort_keys=True) + "\n")
        self._journal.flush()
        os.fsync(self._journal.fileno())

    def _apply(self, record: dict) -> None:
        op = record["op"]
        if op == "create":
            t = AnnotationTask(
                task_id=record["task_id"],
                track_id=record["track_id"],
                stage=record.get("stage", "TRACKED"),
                version=record.get("version", 1),
                model_id=record.get("model_id", ""),
            )
            self._tasks[t.task_id] = t
            if t.task_id not in self._order:
                self._order.append(t.task_id)
        elif op == "advance":
            t = self._tasks[record["task_id"]]
            self._tasks[t.task_id] = replace(
                t,
                stage=record["stage"],
                version=record["version"],
                model_id=record.get("model_id", t.model_id),
            )
        else:
            raise TaskError(f"unknown journal op {op!r}")

    def _replay(self) -> None:
        if self.snapshot_path.exists():
            snap = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            for rec in snap["tasks"]:
                self._apply({"op": "create", **rec})
        if not self.journal_path.exists():
            return
        with open(self.journal_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    # a torn tail from a crash mid-append; everything
                    # before it was acknowledged and is kept
                    break
                self._apply(rec)

    def compact(self) -> None:
        """Fold the journal into the snapshot and truncate it."""
        tmp = self.snapshot_path.with_suffix(".tmp")
        doc = {
            "tasks": [
                {
                    "task_id": t.task_id,
                    "track_id": t.track_id,
                    "stage": t.stage,
                    "version": t.version,
                    "model_id": t.model_id,
                }
                for t in (self._tasks[tid] for tid in self._order)
            ]
        }
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.snapshot_path)
        self._journal.close()
        self._journal = open(self.journal_path, "w", encoding="utf-8")
        self._journal.flush()
        os.fsync(self._journal.fileno())

    def close(self) -> None:
        self._journal.close()

    # -- task operations ----------------------------------------------

    def create(self, track_id: str, task_id: str | None = None) -> AnnotationTask:
        tid = task_id or f"task-{track_id}"
        if tid in self._tasks:
            raise TaskError(f"task {tid} already exists")
        task = AnnotationTask(task_id=tid, track_id=track_id)
        self._append({"op": "create", "task_id": tid, "track_id": track_id,
                      "stage": task.stage, "version": task.version})
        self._tasks[tid] = task
        self._order.append(tid)
        return task

    def get(self, task_id: str) -> AnnotationTask:
        if task_id not in self._tasks:
            raise TaskError(f"no task {task_id}")
        return self._tasks[task_id]

    def has_task_for(self, track_id: str) -> bool:
        return any(t.track_id == track_id for t in self._tasks.values())

    def next_open(self, stage: str) -> AnnotationTask | None:
        if stage not in STAGES:
            raise TaskError(f"unknown stage {stage!r}")
        for tid in self._order:
            if self._tasks[tid].stage == stage:
                return self._tasks[tid]
        return None

    def submit(self, task_id: str, version: int, payload: dict) -> AnnotationTask:
        """Apply a payload to a task; the ack implies the write is on disk."""
        task = self.get(task_id)
        if version != task.version:
            raise VersionConflict(
                f"task {task_id} is at version {task.version}, submission saw {version}"
            )
        nxt = advance_task(task, payload)
        self._append({
            "op": "advance",
            "task_id": task_id,
            "stage": nxt.stage,
            "version": nxt.version,
            "model_id": nxt.model_id,
            "payload": payload,
        })
        self._tasks[task_id] = nxt
        return nxt

    def all_tasks(self) -> list[AnnotationTask]:
        return [self._tasks[tid] for tid in self._order]
