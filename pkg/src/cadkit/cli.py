"""Command line front end.

Subcommands mirror the pipeline stages: track detections into object
tracks, rank CAD candidates, solve poses from correspondence files,
report scene statistics, generate a synthetic benchmark set, run the
solver ablation table, and serve the annotation HTTP API.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .mesh import detect_symmetry, dump_mesh, load_mesh
from .pipeline import (
    SyntheticSpec,
    ablation_csv,
    compute_scene_stats,
    generate_synthetic_scene,
    load_scene,
    make_ablation_configs,
    render_scene_frames,
    run_ablation,
    save_scene,
    stats_csv,
)
from .retrieval import (
    HashEmbeddingProvider,
    ModelViewDescriptors,
    N_VIEWS,
    dump_candidates_json,
    dump_descriptor_db_jsonl,
    load_descriptor_db_jsonl,
    rank_candidates,
)
from .solver import (
    dump_correspondences_json,
    dump_solve_result_json,
    estimate_pose,
    load_correspondences_json,
    load_solve_result_json,
)
from .tracking import (
    dump_tracks_json,
    load_detections_jsonl,
    load_tracks_json,
    partition_tracks,
)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        click.echo(text)


@click.group()
def main():
    """Annotate videos with posed CAD models."""


@main.command()
@click.argument("detections", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write tracks JSON here instead of stdout.")
@click.option("--theta", default=0.6, show_default=True,
              help="Similarity threshold for linking detections.")
def track(detections, out, theta):
    """Group a detections JSONL file into object tracks."""
    dets = load_detections_jsonl(_read(detections))
    tracks = partition_tracks(dets, theta=theta)
    click.echo(f"{len(dets)} detections -> {len(tracks)} tracks", err=True)
    _emit(dump_tracks_json(tracks), out)


@main.command()
@click.argument("tracks_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("db_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "-o", type=click.Path(file_okay=False), default=None,
              help="Write one candidates JSON per track into this directory.")
def retrieve(tracks_file, db_file, out_dir):
    """Rank CAD candidates for each track against a descriptor db."""
    tracks = load_tracks_json(_read(tracks_file))
    database = load_descriptor_db_jsonl(_read(db_file))
    emb = HashEmbeddingProvider()
    for t in tracks:
        cands = rank_candidates(
            t.track_id, [d.descriptor for d in t.detections], t.category, database, emb
        )
        text = dump_candidates_json(cands)
        if out_dir:
            path = Path(out_dir)
            path.mkdir(parents=True, exist_ok=True)
            (path / f"{t.track_id}.json").write_text(text, encoding="utf-8")
        else:
            click.echo(text)
    if out_dir:
        click.echo(f"wrote {len(tracks)} candidate lists to {out_dir}", err=True)


@main.command()
@click.argument("corr_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scene", "scene_file", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Scene JSON with cameras.")
@click.option("--mesh", "mesh_file", required=True,
              type=click.Path(exists=True, dir_okay=False), help="CAD model OBJ.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write the solve result JSON here instead of stdout.")
def solve(corr_file, scene_file, mesh_file, out):
    """Estimate a 9-DoF pose from a correspondence file."""
    corr = load_correspondences_json(_read(corr_file))
    scene = load_scene(_read(scene_file))
    mesh = load_mesh(_read(mesh_file), model_id=corr.model_id)
    sym = detect_symmetry(mesh)
    result = estimate_pose(corr, scene.cameras(), mesh, sym, world_up=scene.world_up)
    click.echo(
        f"mean reprojection {result.mean_reproj_px:.2f} px, "
        f"converged={result.converged}, scale mode {result.scale_mode}",
        err=True,
    )
    _emit(dump_solve_result_json(result), out)


@main.command()
@click.argument("data_dir", type=click.Path(exists=True, file_okay=False))
def stats(data_dir):
    """Print per-scene statistics CSV for an annotation data directory."""
    root = Path(data_dir)
    scene_files = sorted((root / "scenes").glob("*.json"))
    if not scene_files:
        raise click.ClickException(f"no scenes under {root / 'scenes'}")
    categories = {}
    models_file = root / "models.json"
    if models_file.exists():
        doc = json.loads(models_file.read_text(encoding="utf-8"))
        categories = {m["model_id"]: m.get("category", "") for m in doc.get("models", [])}
    for scene_file in scene_files:
        scene = load_scene(scene_file.read_text(encoding="utf-8"))
        tracks, poses, meshes = [], {}, {}
        for tp in sorted((root / "tracks").glob("*.json")):
            doc = json.loads(tp.read_text(encoding="utf-8"))
            if doc.get("scene_id") != scene.scene_id:
                continue
            t = load_tracks_json(json.dumps({"tracks": [doc["track"]]}))[0]
            tracks.append(t)
            rp = root / "results" / f"{t.track_id}.json"
            if not rp.exists():
                continue
            result = load_solve_result_json(rp.read_text(encoding="utf-8"))
            mid = _model_for_track(root, t.track_id)
            mp = root / "meshes" / f"{mid}.obj"
            if mid and mp.exists():
                poses[t.track_id] = result.pose
                meshes[t.track_id] = load_mesh(
                    mp.read_text(encoding="utf-8"),
                    model_id=mid, category=categories.get(mid, ""),
                )
        s = compute_scene_stats(scene, tracks, poses, meshes)
        click.echo(f"# scene {scene.scene_id}", err=True)
        click.echo(stats_csv(s))


def _model_for_track(root: Path, track_id: str) -> str:
    """The model a track's correspondences were annotated against."""
    cp = root / "corr" / f"{track_id}.json"
    if cp.exists():
        return str(json.loads(cp.read_text(encoding="utf-8")).get("model_id", ""))
    return ""


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--objects", default=10, show_default=True, help="Objects in the scene.")
@click.option("--sym-frac", default=0.278, show_default=True,
              help="Fraction of rotation-symmetric objects.")
@click.option("--coplanar-frac", default=0.155, show_default=True,
              help="Fraction of objects with coplanar annotated points.")
@click.option("--noise-px", default=0.0, show_default=True,
              help="Pixel noise on correspondences.")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False),
              default="synth-data", show_default=True)
@click.option("--render/--no-render", default=True, show_default=True,
              help="Also render frame PNGs.")
def synth(seed, objects, sym_frac, coplanar_frac, noise_px, out_dir, render):
    """Generate a synthetic scene as a ready-to-serve data directory."""
    spec = SyntheticSpec(n_objects=objects, sym_frac=sym_frac,
                         coplanar_frac=coplanar_frac, noise_px=noise_px)
    synth = generate_synthetic_scene(spec, seed=seed)
    root = Path(out_dir)
    for sub in ("scenes", "meshes", "tracks", "corr", "candidates", "results"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    scene = synth.scene
    (root / "scenes" / f"{scene.scene_id}.json").write_text(
        save_scene(scene), encoding="utf-8"
    )

    models = []
    db = []
    rng = np.random.default_rng(seed + 1)
    desc_by_track = {
        t.track_id: t.detections[0].descriptor for t in synth.tracks if t.detections
    }
    for obj in synth.objects:
        (root / "meshes" / f"{obj.model_id}.obj").write_text(
            dump_mesh(obj.mesh), encoding="utf-8"
        )
        models.append({"model_id": obj.model_id, "category": obj.category})
        desc = desc_by_track.get(obj.track_id)
        if desc is not None:
            # views cluster around the track's descriptor so retrieval
            # lands on the right model
            views = desc + 0.05 * rng.normal(size=(N_VIEWS, len(desc)))
            views /= np.linalg.norm(views, axis=1, keepdims=True)
            db.append(ModelViewDescriptors(
                model_id=obj.model_id, category=obj.category, view_descriptors=views,
            ))
        (root / "corr" / f"{obj.track_id}.json").write_text(
            dump_correspondences_json(obj.corr), encoding="utf-8"
        )
    (root / "models.json").write_text(
        json.dumps({"models": models}, indent=2, sort_keys=True), encoding="utf-8"
    )
    (root / "db.jsonl").write_text(dump_descriptor_db_jsonl(db), encoding="utf-8")

    for t in synth.tracks:
        doc = {
            "scene_id": scene.scene_id,
            "track": json.loads(dump_tracks_json([t]))["tracks"][0],
        }
        (root / "tracks" / f"{t.track_id}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8"
        )

    gt = {
        obj.track_id: {
            "model_id": obj.model_id,
            "category": obj.category,
            "symmetry_order": obj.sym.order,
            "coplanar": obj.coplanar,
            "pose": {
                "T": [float(x) for x in obj.pose.T],
                "R": [float(x) for x in obj.pose.R.reshape(-1)],
                "S": [float(x) for x in obj.pose.S],
            },
        }
        for obj in synth.objects
    }
    (root / "gt.json").write_text(
        json.dumps(gt, indent=2, sort_keys=True), encoding="utf-8"
    )

    if render:
        posed = [(o.mesh, o.pose) for o in synth.objects]
        render_scene_frames(scene, posed, root / "images" / scene.scene_id)

    click.echo(
        f"scene {scene.scene_id}: {len(synth.objects)} objects, "
        f"{len(scene.frames)} frames -> {root}",
        err=True,
    )


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--objects", default=20, show_default=True)
@click.option("--sym-frac", default=0.278, show_default=True)
@click.option("--coplanar-frac", default=0.155, show_default=True)
@click.option("--noise-px", default=2.0, show_default=True)
@click.option("--tau-px", default=5.0, show_default=True,
              help="Verification threshold in pixels.")
def ablate(seed, objects, sym_frac, coplanar_frac, noise_px, tau_px):
    """Verified-fraction table across solver feature subsets."""
    spec = SyntheticSpec(n_objects=objects, sym_frac=sym_frac,
                         coplanar_frac=coplanar_frac, noise_px=noise_px)
    suite = generate_synthetic_scene(spec, seed=seed)
    rows = run_ablation(make_ablation_configs(), suite, tau_px=tau_px)
    click.echo(ablation_csv(rows))


@main.command()
@click.option("--port", "-p", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", "-d", required=True,
              type=click.Path(exists=True, file_okay=False))
def serve(port, host, data_dir):
    """Serve the annotation HTTP API over a data directory."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()
