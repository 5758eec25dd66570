"""HTTP service that walks annotation tasks through the pipeline.

Serves scene records, frame images, meshes, and candidate lists to the
browser tool, hands out open tasks FIFO per stage, and applies
submitted results through the durable task store. The solve step runs
in the request handler: it is fast at annotation sizes, comfortably
inside the one-minute budget a submission is allowed to take, and
keeping it synchronous means the 200 response already tells the
annotator whether the pose converged.

Data directory layout:

    scenes/<scene_id>.json        scene record
    images/<scene_id>/<frame>.png pre-extracted frames, zero-padded ids
    meshes/<model_id>.obj         CAD models
    models.json                   model_id -> category index
    db.jsonl                      view descriptors for retrieval
    tracks/<track_id>.json        {"scene_id": ..., "track": ...}
    candidates/<track_id>.json    ranked CAD candidates
    corr/<track_id>.json          submitted correspondences
    results/<track_id>.json       solver output
    tasks/                        journal + snapshot

Payload files (correspondences, solve results) are written before the
journal advance is acknowledged, so a task that claims a stage always
has the matching artifact on disk.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware

from .mesh import detect_symmetry, load_mesh
from .pipeline import (
    InvalidTransition,
    PayloadError,
    TaskError,
    TaskStore,
    VersionConflict,
    load_scene,
)
from .retrieval import (
    HashEmbeddingProvider,
    RetrievalError,
    dump_candidates_json,
    load_candidates_json,
    load_descriptor_db_jsonl,
    rank_candidates,
)
from .solver import (
    SolverConfig,
    SolverError,
    dump_solve_result_json,
    estimate_pose,
    load_correspondences_json,
    validate_correspondences,
)
from .tracking import Track, TrackingError, dump_tracks_json, load_tracks_json

log = logging.getLogger(__name__)

SOLVE_BUDGET_S = 60.0


class ServiceError(RuntimeError):
    pass


def _track_record(track: Track) -> dict:
    return json.loads(dump_tracks_json([track]))["tracks"][0]


def _parse_track(rec: dict) -> Track:
    return load_tracks_json(json.dumps({"tracks": [rec]}))[0]


class ServiceData:
    """Filesystem backing for one service instance."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        if not self.root.is_dir():
            raise ServiceError(f"data dir {self.root} does not exist")
        for sub in ("scenes", "images", "meshes", "tracks",
                    "candidates", "corr", "results"):
            (self.root / sub).mkdir(exist_ok=True)
        self.store = TaskStore(self.root / "tasks")
        self.lock = threading.Lock()
        self.solver_config = SolverConfig()
        self._adopt_tracks()

    def _adopt_tracks(self) -> None:
        """Create a task for any track file that does not have one yet."""
        for path in sorted((self.root / "tracks").glob("*.json")):
            track_id = path.stem
            if not self.store.has_task_for(track_id):
                self.store.create(track_id)

    # -- path helpers -------------------------------------------------

    def scene_path(self, scene_id: str) -> Path:
        return self.root / "scenes" / f"{scene_id}.json"

    def image_path(self, scene_id: str, frame_id: int) -> Path:
        return self.root / "images" / scene_id / f"{frame_id:06d}.png"

    def mesh_path(self, model_id: str) -> Path:
        return self.root / "meshes" / f"{model_id}.obj"

    def track_path(self, track_id: str) -> Path:
        return self.root / "tracks" / f"{track_id}.json"

    def candidates_path(self, track_id: str) -> Path:
        return self.root / "candidates" / f"{track_id}.json"

    def corr_path(self, track_id: str) -> Path:
        return self.root / "corr" / f"{track_id}.json"

    def result_path(self, track_id: str) -> Path:
        return self.root / "results" / f"{track_id}.json"

    # -- loading ------------------------------------------------------

    def load_scene(self, scene_id: str):
        path = self.scene_path(scene_id)
        if not path.exists():
            raise FileNotFoundError(f"no scene {scene_id}")
        return load_scene(path.read_text(encoding="utf-8"))

    def load_track_doc(self, track_id: str) -> dict:
        path = self.track_path(track_id)
        if not path.exists():
            raise FileNotFoundError(f"no track {track_id}")
        return json.loads(path.read_text(encoding="utf-8"))

    def model_categories(self) -> dict[str, str]:
        path = self.root / "models.json"
        if not path.exists():
            return {}
        doc = json.loads(path.read_text(encoding="utf-8"))
        return {m["model_id"]: m.get("category", "") for m in doc.get("models", [])}

    def load_model(self, model_id: str):
        path = self.mesh_path(model_id)
        if not path.exists():
            raise FileNotFoundError(f"no model {model_id}")
        category = self.model_categories().get(model_id, "")
        return load_mesh(path.read_text(encoding="utf-8"),
                         model_id=model_id, category=category)

    def candidates_for(self, track_id: str):
        """Stored candidate list, computed from db.jsonl when absent."""
        path = self.candidates_path(track_id)
        if path.exists():
            return load_candidates_json(path.read_text(encoding="utf-8"))
        db_path = self.root / "db.jsonl"
        if not db_path.exists():
            raise FileNotFoundError(f"no candidates for track {track_id}")
        doc = self.load_track_doc(track_id)
        track = _parse_track(doc["track"])
        database = load_descriptor_db_jsonl(db_path.read_text(encoding="utf-8"))
        cands = rank_candidates(
            track_id,
            [d.descriptor for d in track.detections],
            track.category,
            database,
            HashEmbeddingProvider(),
        )
        path.write_text(dump_candidates_json(cands), encoding="utf-8")
        return cands


def _task_json(task) -> dict:
    return {
        "task_id": task.task_id,
        "track_id": task.track_id,
        "stage": task.stage,
        "version": task.version,
        "model_id": task.model_id,
    }


def _error(status: int, message: str) -> Response:
    return Response(
        content=json.dumps({"detail": message}),
        status_code=status,
        media_type="application/json",
    )


def create_app(data_dir: str | Path) -> FastAPI:
    data = ServiceData(data_dir)
    app = FastAPI(title="cadkit annotation service")
    app.state.data = data
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # -- scenes and assets --------------------------------------------

    @app.get("/api/scenes/{scene_id}")
    def get_scene(scene_id: str):
        path = data.scene_path(scene_id)
        if not path.exists():
            return _error(404, f"no scene {scene_id}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.get("/api/scenes/{scene_id}/frames/{frame_id}/image")
    def get_frame_image(scene_id: str, frame_id: int):
        path = data.image_path(scene_id, frame_id)
        if not path.exists():
            return _error(404, f"no image for scene {scene_id} frame {frame_id}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/api/scenes/{scene_id}/tracks")
    def get_scene_tracks(scene_id: str):
        if not data.scene_path(scene_id).exists():
            return _error(404, f"no scene {scene_id}")
        docs = []
        for path in sorted((data.root / "tracks").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            if doc.get("scene_id") == scene_id:
                docs.append(doc)
        return {"tracks": docs}

    @app.get("/api/models/{model_id}/mesh")
    def get_mesh(model_id: str):
        path = data.mesh_path(model_id)
        if not path.exists():
            return _error(404, f"no model {model_id}")
        return Response(content=path.read_bytes(), media_type="model/obj")

    # -- tracks -------------------------------------------------------

    @app.post("/api/tracks", status_code=201)
    def post_track(body: dict):
        scene_id = body.get("scene_id")
        rec = body.get("track")
        if not isinstance(scene_id, str) or not isinstance(rec, dict):
            return _error(422, "body needs 'scene_id' and 'track'")
        if not data.scene_path(scene_id).exists():
            return _error(404, f"no scene {scene_id}")
        try:
            track = _parse_track(rec)
        except (TrackingError, KeyError, TypeError, ValueError) as exc:
            return _error(422, f"bad track: {exc}")
        with data.lock:
            if data.track_path(track.track_id).exists():
                return _error(409, f"track {track.track_id} already exists")
            doc = {"scene_id": scene_id, "track": _track_record(track)}
            data.track_path(track.track_id).write_text(
                json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
            )
            task = data.store.create(track.track_id)
        return {"track_id": track.track_id, "task": _task_json(task)}

    @app.get("/api/tracks/{track_id}")
    def get_track(track_id: str):
        try:
            return data.load_track_doc(track_id)
        except FileNotFoundError as exc:
            return _error(404, str(exc))

    @app.get("/api/tracks/{track_id}/candidates")
    def get_candidates(track_id: str):
        try:
            cands = data.candidates_for(track_id)
        except FileNotFoundError as exc:
            return _error(404, str(exc))
        except RetrievalError as exc:
            return _error(422, str(exc))
        return json.loads(dump_candidates_json(cands))

    @app.get("/api/tracks/{track_id}/solve-result")
    def get_solve_result(track_id: str):
        path = data.result_path(track_id)
        if not path.exists():
            return _error(404, f"track {track_id} has no solve result")
        result = json.loads(path.read_text(encoding="utf-8"))
        # The pose applies to the mirrored model when the correspondence
        # set was flipped; overlay renderers need to know that.
        corr_path = data.corr_path(track_id)
        if corr_path.exists():
            corr_doc = json.loads(corr_path.read_text(encoding="utf-8"))
            result["flipped"] = bool(corr_doc.get("flipped", False))
        else:
            result["flipped"] = False
        return result

    # -- tasks --------------------------------------------------------

    @app.get("/api/tasks/next")
    def next_task(stage: str = "TRACKED"):
        try:
            task = data.store.next_open(stage)
        except TaskError as exc:
            return _error(422, str(exc))
        if task is None:
            return _error(404, f"no open task at stage {stage}")
        return _task_json(task)

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        try:
            return _task_json(data.store.get(task_id))
        except TaskError as exc:
            return _error(404, str(exc))

    @app.post("/api/tasks/{task_id}/result")
    def post_result(task_id: str, body: dict):
        version = body.get("version")
        payload = body.get("payload")
        if not isinstance(version, int) or not isinstance(payload, dict):
            return _error(422, "body needs integer 'version' and object 'payload'")
        if body.get("annotator_id"):
            payload = {**payload, "annotator_id": str(body["annotator_id"])}
        try:
            task = data.store.get(task_id)
        except TaskError as exc:
            return _error(404, str(exc))
        if version != task.version:
            # reject stale writes before doing any payload work; submit
            # re-checks under the lock
            return _error(
                409, f"task {task_id} is at version {task.version}, submission saw {version}"
            )
        try:
            payload = _prepare_payload(data, task, payload)
            with data.lock:
                task = data.store.submit(task_id, version, payload)
        except VersionConflict as exc:
            return _error(409, str(exc))
        except (InvalidTransition, PayloadError, SolverError, FileNotFoundError) as exc:
            return _error(422, str(exc))
        return _task_json(task)

    return app


def _prepare_payload(data: ServiceData, task, payload: dict) -> dict:
    """Run the side effects a payload implies and return it enriched.

    choice gets its model_id resolved from the candidate list;
    correspondences are validated against the scene and persisted;
    solve runs the pose estimator and persists the result. All files
    land on disk before the journal advance that references them.
    """
    kind = payload.get("kind")
    if kind == "choice" and task.stage == "TRACKED":
        idx = payload.get("index")
        if isinstance(idx, int) and not isinstance(idx, bool) and idx >= 0:
            cands = data.candidates_for(task.track_id)
            if idx >= len(cands.entries):
                raise PayloadError(
                    f"choice index {idx} out of range, {len(cands.entries)} candidates"
                )
            payload = {**payload, "model_id": cands.entries[idx][0]}
    elif kind == "correspondences" and task.stage == "CAD_SELECTED":
        doc = payload.get("data")
        if isinstance(doc, dict) and doc.get("items"):
            corr = load_correspondences_json(json.dumps(doc))
            if corr.track_id != task.track_id:
                raise PayloadError(
                    f"correspondences are for track {corr.track_id}, task is {task.track_id}"
                )
            if corr.model_id != task.model_id:
                raise PayloadError(
                    f"correspondences name model {corr.model_id}, task chose {task.model_id}"
                )
            scene_id = data.load_track_doc(task.track_id)["scene_id"]
            scene = data.load_scene(scene_id)
            validate_correspondences(corr, scene.cameras())
            data.corr_path(task.track_id).write_text(
                json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
            )
    elif kind == "solve" and task.stage == "CORRESPONDED":
        corr_path = data.corr_path(task.track_id)
        if not corr_path.exists():
            raise PayloadError(f"track {task.track_id} has no stored correspondences")
        corr = load_correspondences_json(corr_path.read_text(encoding="utf-8"))
        scene_id = data.load_track_doc(task.track_id)["scene_id"]
        scene = data.load_scene(scene_id)
        mesh = data.load_model(task.model_id)
        sym = detect_symmetry(mesh)
        t0 = time.monotonic()
        result = estimate_pose(corr, scene.cameras(), mesh, sym,
                               data.solver_config, world_up=scene.world_up)
        elapsed = time.monotonic() - t0
        if elapsed > SOLVE_BUDGET_S:
            log.warning("solve for %s took %.1f s, over the %.0f s budget",
                        task.track_id, elapsed, SOLVE_BUDGET_S)
        data.result_path(task.track_id).write_text(
            dump_solve_result_json(result), encoding="utf-8"
        )
        payload = {
            **payload,
            "mean_reproj_px": result.mean_reproj_px,
            "converged": result.converged,
            "scale_mode": result.scale_mode,
        }
    return payload
