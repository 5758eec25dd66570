"""Scene files, keyframe spacing, scene statistics, and the synthetic
benchmark harness."""

import numpy as np
import pytest

from cadkit.geometry import CameraFrame, Pose9DoF
from cadkit.mesh import SymmetryClass
from cadkit.pipeline import (
    AblationRow,
    Scene,
    SceneError,
    SceneFrame,
    StatsError,
    SyntheticScene,
    SyntheticSpec,
    ablation_csv,
    compute_scene_stats,
    generate_synthetic_scene,
    load_scene,
    make_ablation_configs,
    pose_error,
    run_ablation,
    render_frame,
    render_scene_frames,
    save_scene,
    select_keyframes,
    spaced_frame_ids,
    stats_csv,
)
from cadkit.pipeline.synthetic import SyntheticError
from cadkit.primitives import box
from cadkit.solver import (
    SolverConfig,
    dump_correspondences_json,
    estimate_pose,
    scale_parameterization,
    total_loss,
    up_axis_loss,
)
from cadkit.tracking import Detection, Track

EY = np.array([0.0, 1.0, 0.0])


def straight_cam(fid, ts=None, shift=0.0):
    """Camera at the origin looking down +z, optionally shifted along x."""
    ext = np.concatenate([np.eye(3), np.array([[shift], [0.0], [0.0]])], axis=1)
    return CameraFrame(
        frame_id=fid,
        intrinsics=(500.0, 500.0, 400.0, 300.0),
        extrinsics=ext,
        image_size=(800, 600),
        timestamp=(fid * 1000 if ts is None else ts),
    )


def straight_scene(n_frames=3, scene_id="sc-0"):
    frames = tuple(
        SceneFrame(camera=straight_cam(k), image=f"images/{scene_id}/{k:06d}.png")
        for k in range(n_frames)
    )
    return Scene(scene_id=scene_id, frames=frames)


def unit_descriptor():
    d = np.zeros(8)
    d[0] = 1.0
    return d


class TestSceneIO:
    def test_roundtrip_byte_identical(self):
        text = save_scene(straight_scene())
        again = save_scene(load_scene(text))
        assert text == again

    def test_split_and_world_up_survive(self):
        sc = Scene(scene_id="sc-1", frames=straight_scene().frames, split="test")
        back = load_scene(save_scene(sc))
        assert back.split == "test"
        assert np.allclose(back.world_up, EY)

    def test_extrinsics_length_reported_with_path(self):
        import json

        doc = json.loads(save_scene(straight_scene()))
        doc["frames"][2]["extrinsics"] = doc["frames"][2]["extrinsics"][:11]
        with pytest.raises(SceneError, match=r"\$\.frames\[2\]\.extrinsics: expected 12"):
            load_scene(json.dumps(doc))

    def test_missing_field_reported_with_path(self):
        import json

        doc = json.loads(save_scene(straight_scene()))
        del doc["frames"][0]["intrinsics"]
        with pytest.raises(SceneError, match=r"\$\.frames\[0\]\.intrinsics: missing"):
            load_scene(json.dumps(doc))

    def test_bad_rotation_reported_with_path(self):
        import json

        doc = json.loads(save_scene(straight_scene()))
        doc["frames"][1]["extrinsics"][0] = 3.0
        with pytest.raises(SceneError, match=r"\$\.frames\[1\]"):
            load_scene(json.dumps(doc))

    def test_unparseable_text(self):
        with pytest.raises(SceneError, match="does not parse"):
            load_scene("{not json")

    def test_frames_must_be_time_ordered(self):
        frames = (
            SceneFrame(camera=straight_cam(0, ts=5000), image="a.png"),
            SceneFrame(camera=straight_cam(1, ts=1000), image="b.png"),
        )
        with pytest.raises(SceneError, match="ordered by timestamp"):
            Scene(scene_id="sc-2", frames=frames)

    def test_duplicate_frame_ids_rejected(self):
        frames = (
            SceneFrame(camera=straight_cam(0), image="a.png"),
            SceneFrame(camera=straight_cam(0, ts=2000), image="b.png"),
        )
        with pytest.raises(SceneError, match="unique"):
            Scene(scene_id="sc-3", frames=frames)

    def test_single_frame_rejected(self):
        frames = (SceneFrame(camera=straight_cam(0), image="a.png"),)
        with pytest.raises(SceneError, match="at least 2"):
            Scene(scene_id="sc-4", frames=frames)

    def test_world_up_must_be_unit(self):
        with pytest.raises(SceneError, match="unit length"):
            Scene(scene_id="sc-5", frames=straight_scene().frames,
                  world_up=np.array([0.0, 2.0, 0.0]))

    def test_camera_lookup(self):
        sc = straight_scene()
        assert set(sc.cameras()) == {0, 1, 2}
        assert sc.frame(1).camera.frame_id == 1
        with pytest.raises(SceneError, match="no frame 9"):
            sc.frame(9)


class TestKeyframes:
    def test_six_regularly_spaced_over_51(self):
        assert spaced_frame_ids(list(range(51)), 6) == [0, 10, 20, 30, 40, 50]

    def test_short_list_returned_whole(self):
        assert spaced_frame_ids([4, 9, 11], 6) == [4, 9, 11]

    def test_k_one_picks_middle(self):
        assert spaced_frame_ids(list(range(11)), 1) == [5]
        assert spaced_frame_ids(list(range(10)), 1) == [4]

    def test_invalid_k_and_empty_input(self):
        with pytest.raises(ValueError, match="k must be >= 1"):
            spaced_frame_ids([1, 2, 3], 0)
        with pytest.raises(ValueError, match="empty"):
            spaced_frame_ids([], 3)

    def test_endpoints_always_kept(self):
        ids = spaced_frame_ids(list(range(0, 143, 7)), 6)
        assert ids[0] == 0 and ids[-1] == 140
        assert len(ids) == 6

    def test_on_track(self):
        dets = [
            Detection(frame_id=f, box=(0, 0, 10, 10), category="chair",
                      score=1.0, descriptor=unit_descriptor())
            for f in range(51)
        ]
        track = Track(track_id="t-0", detections=dets)
        assert select_keyframes(track, k=6) == [0, 10, 20, 30, 40, 50]


def stats_fixture(depths=(2.0,), n_frames=10):
    """One box object per requested depth, detected in every frame."""
    frames = tuple(
        SceneFrame(camera=straight_cam(k), image=f"f{k}.png") for k in range(n_frames)
    )
    scene = Scene(scene_id="stats", frames=frames)
    tracks, poses, meshes = [], {}, {}
    for i, z in enumerate(depths):
        tid = f"t-{i}"
        dets = [
            Detection(frame_id=k, box=(0, 0, 80, 60), category="chair",
                      score=1.0, descriptor=unit_descriptor())
            for k in range(n_frames)
        ]
        tracks.append(Track(track_id=tid, detections=dets))
        poses[tid] = Pose9DoF(T=np.array([0.0, 0.0, z]), R=np.eye(3), S=np.ones(3))
        meshes[tid] = box(0.4, 0.4, 0.4, model_id=f"m-{i}", category="chair")
    return scene, tracks, poses, meshes


class TestSceneStats:
    def test_one_object_every_frame(self):
        scene, tracks, poses, meshes = stats_fixture()
        stats = compute_scene_stats(scene, tracks, poses, meshes)
        assert stats.objects_per_frame == 1.0

    def test_box_area_fraction(self):
        scene, tracks, poses, meshes = stats_fixture()
        stats = compute_scene_stats(scene, tracks, poses, meshes)
        assert abs(stats.mean_bbox_area_fraction - 0.01) < 1e-12

    def test_depth_dynamic_range(self):
        scene, tracks, poses, meshes = stats_fixture(depths=(2.0, 9.0))
        stats = compute_scene_stats(scene, tracks, poses, meshes)
        assert abs(stats.z_dynamic_range - 4.5) < 1e-9

    def test_truncation_histogram_counts_posed_objects(self):
        scene, tracks, poses, meshes = stats_fixture(depths=(2.0, 9.0))
        stats = compute_scene_stats(scene, tracks, poses, meshes)
        assert sum(stats.truncation_histogram) == 2
        # both objects project near the image center, nothing is cut off
        assert stats.truncation_histogram[0] == 2

    def test_input_order_invariance(self):
        scene, tracks, poses, meshes = stats_fixture(depths=(2.0, 9.0))
        a = compute_scene_stats(scene, tracks, poses, meshes)
        b = compute_scene_stats(
            scene,
            list(reversed(tracks)),
            dict(reversed(list(poses.items()))),
            dict(reversed(list(meshes.items()))),
        )
        assert a == b

    def test_equal_timestamp_frame_order_invariance(self):
        cams = [straight_cam(k, ts=0) for k in range(3)]
        mk = lambda order: Scene(
            scene_id="stats",
            frames=tuple(SceneFrame(camera=cams[i], image=f"f{i}.png") for i in order),
        )
        _, tracks, poses, meshes = stats_fixture(depths=(2.0, 9.0), n_frames=3)
        a = compute_scene_stats(mk([0, 1, 2]), tracks, poses, meshes)
        b = compute_scene_stats(mk([2, 0, 1]), tracks, poses, meshes)
        assert a == b

    def test_no_posed_objects(self):
        scene, tracks, _, meshes = stats_fixture()
        with pytest.raises(StatsError, match="no posed objects"):
            compute_scene_stats(scene, tracks, {}, meshes)

    def test_csv_single_data_row(self):
        scene, tracks, poses, meshes = stats_fixture()
        text = stats_csv(compute_scene_stats(scene, tracks, poses, meshes))
        lines = text.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("objects_per_frame,")
        assert lines[0].endswith("truncation_bin_9")
        assert lines[1].split(",")[0] == "1"


class TestSynthetic:
    def test_same_seed_identical(self):
        spec = SyntheticSpec(n_objects=6, noise_px=1.0)
        a = generate_synthetic_scene(spec, seed=11)
        b = generate_synthetic_scene(spec, seed=11)
        assert save_scene(a.scene) == save_scene(b.scene)
        for x, y in zip(a.objects, b.objects):
            assert dump_correspondences_json(x.corr) == dump_correspondences_json(y.corr)

    def test_different_seed_differs(self):
        spec = SyntheticSpec(n_objects=6)
        a = generate_synthetic_scene(spec, seed=11)
        b = generate_synthetic_scene(spec, seed=12)
        assert save_scene(a.scene) != save_scene(b.scene)

    def test_noiseless_ground_truth_has_zero_loss(self):
        spec = SyntheticSpec(n_objects=10, noise_px=0.0)
        synth = generate_synthetic_scene(spec, seed=5)
        cams = synth.cameras()
        cfg = SolverConfig()
        for obj in synth.objects:
            l = total_loss(obj.pose, obj.corr, cams, obj.sym, cfg, category=obj.category)
            assert l < 1e-9

    def test_all_symmetric_when_asked(self):
        synth = generate_synthetic_scene(SyntheticSpec(n_objects=12, sym_frac=1.0), seed=3)
        assert all(o.sym.order in (2, 4, 36) for o in synth.objects)

    def test_scale_mode_matches_annotation_style(self):
        cop = generate_synthetic_scene(
            SyntheticSpec(n_objects=6, sym_frac=0.0, coplanar_frac=1.0), seed=9
        )
        for o in cop.objects:
            assert o.coplanar
            sp = scale_parameterization(o.corr.model_points(), o.sym, EY)
            assert sp.mode == "coplanar_2dof"
        rot = generate_synthetic_scene(
            SyntheticSpec(n_objects=8, sym_frac=1.0, coplanar_frac=0.0), seed=9
        )
        for o in rot.objects:
            sp = scale_parameterization(o.corr.model_points(), o.sym, EY)
            want = "rotsym_tied" if o.sym.order == 36 else "full"
            assert sp.mode == want

    def test_noise_moves_pixels(self):
        clean = generate_synthetic_scene(SyntheticSpec(n_objects=4), seed=2)
        noisy = generate_synthetic_scene(SyntheticSpec(n_objects=4, noise_px=2.0), seed=2)
        moved = any(
            not np.allclose(a.q_pixel, b.q_pixel)
            for x, y in zip(clean.objects, noisy.objects)
            for a, b in zip(x.corr.items, y.corr.items)
        )
        assert moved

    def test_pose_error_is_modulo_symmetry(self):
        synth = generate_synthetic_scene(SyntheticSpec(n_objects=8, sym_frac=1.0), seed=4)
        obj = synth.objects[0]
        g = obj.sym.elements()[1]
        shifted = Pose9DoF(T=obj.pose.T, R=obj.pose.R @ g, S=obj.pose.S)
        err = pose_error(shifted, obj.pose, obj.sym)
        assert err["rot_deg"] < 1e-6

    def test_tracks_follow_objects(self):
        synth = generate_synthetic_scene(SyntheticSpec(n_objects=5), seed=8)
        assert len(synth.tracks) == 5
        for t in synth.tracks:
            assert t.detections

    def test_spec_validation(self):
        with pytest.raises(SyntheticError):
            SyntheticSpec(n_objects=0)
        with pytest.raises(SyntheticError):
            SyntheticSpec(sym_frac=1.2)
        with pytest.raises(SyntheticError):
            SyntheticSpec(noise_px=-1.0)
        with pytest.raises(SyntheticError):
            SyntheticSpec(min_frames=4, max_frames=3)
        with pytest.raises(SyntheticError):
            SyntheticSpec(n_points=3)


class TestAblation:
    def test_empty_suite_rejected(self):
        empty = SyntheticScene(scene=straight_scene(), objects=())
        with pytest.raises(Exception, match="empty suite"):
            run_ablation(make_ablation_configs(), empty)

    def test_labels_and_csv(self):
        rows = [
            AblationRow("base", 1, 4),
            AblationRow("+coplanar", 2, 4),
            AblationRow("+symmetry", 3, 4),
            AblationRow("+up-axis", 4, 4),
        ]
        text = ablation_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == "config,verified,total,fraction"
        assert lines[1] == "base,1,4,0.2500"
        assert lines[-1] == "+up-axis,4,4,1.0000"

    def test_configs_are_cumulative(self):
        cfgs = dict(make_ablation_configs())
        assert list(cfgs) == ["base", "+coplanar", "+symmetry", "+up-axis"]
        assert not cfgs["base"].enable_coplanar
        assert not cfgs["base"].enable_symmetry
        assert cfgs["base"].alpha == 0.0
        assert cfgs["+coplanar"].enable_coplanar and not cfgs["+coplanar"].enable_symmetry
        assert cfgs["+symmetry"].enable_symmetry and cfgs["+symmetry"].alpha == 0.0
        assert cfgs["+up-axis"].alpha > 0.0
        # the front-of-camera guard never turns off
        assert all(c.beta > 0 for c in cfgs.values())

    def test_noiseless_suite_fully_verified_with_everything_on(self):
        synth = generate_synthetic_scene(SyntheticSpec(n_objects=5), seed=6)
        cfgs = make_ablation_configs(SolverConfig(n_starts=8, steps=300))
        rows = run_ablation(cfgs, synth, tau_px=5.0)
        assert rows[-1].label == "+up-axis"
        assert rows[-1].fraction == 1.0
        # and a fraction never exceeds 1 or drops below 0 structurally
        assert all(0.0 <= r.fraction <= 1.0 for r in rows)

    def test_up_term_lowers_final_up_loss(self):
        """With the up objective on, solved poses sit closer to upright:
        the median final up loss over a noisy suite drops strictly."""
        spec = SyntheticSpec(n_objects=10, noise_px=2.0, n_cameras=2,
                             camera_arc=0.6, n_points=4, min_frames=2,
                             max_frames=2, non_upright_frac=0.0)
        synth = generate_synthetic_scene(spec, seed=13)
        cams = synth.cameras()
        base = SolverConfig(n_starts=4, steps=200, learning_rate=0.3, alpha=0.0)
        with_up = SolverConfig(n_starts=4, steps=200, learning_rate=0.3, alpha=10.0)
        off, on = [], []
        for obj in synth.objects:
            r0 = estimate_pose(obj.corr, cams, obj.mesh, obj.sym, base)
            r1 = estimate_pose(obj.corr, cams, obj.mesh, obj.sym, with_up)
            off.append(up_axis_loss(r0.pose.R, obj.mesh.up_axis, EY))
            on.append(up_axis_loss(r1.pose.R, obj.mesh.up_axis, EY))
        assert np.median(on) < np.median(off)


class TestRender:
    def _cam(self):
        ext = np.hstack([np.eye(3), np.array([[0.0], [0.0], [4.0]])])
        return CameraFrame(frame_id=0, intrinsics=(500.0, 500.0, 64.0, 48.0),
                          extrinsics=ext, image_size=(128, 96))

    def test_image_size_and_background(self):
        img = render_frame(self._cam(), [])
        assert img.size == (128, 96)
        assert img.getpixel((0, 0)) == (235, 235, 232)

    def test_mesh_shows_up_and_render_is_deterministic(self):
        cam = self._cam()
        mesh = box(1.0, 1.0, 1.0, model_id="b", category="chair")
        pose = Pose9DoF.identity()
        a = render_frame(cam, [(mesh, pose)])
        b = render_frame(cam, [(mesh, pose)])
        assert a.tobytes() == b.tobytes()
        assert a.getpixel((64, 48)) != (235, 235, 232)

    def test_near_object_occludes_far(self):
        cam = self._cam()
        near = box(1.0, 1.0, 1.0, model_id="near", category="chair")
        far = box(2.0, 2.0, 2.0, model_id="far", category="table")
        p_near = Pose9DoF.identity()
        p_far = Pose9DoF(T=np.array([0.0, 0.0, 3.0]), R=np.eye(3), S=np.ones(3))
        p_gone = Pose9DoF(T=np.array([0.0, 0.0, -50.0]), R=np.eye(3), S=np.ones(3))
        both = render_frame(cam, [(near, p_near), (far, p_far)])
        # same list shape so palette indices line up, near culled
        far_only = render_frame(cam, [(near, p_gone), (far, p_far)])
        assert far_only.getpixel((64, 48)) != (235, 235, 232)
        assert both.getpixel((64, 48)) != far_only.getpixel((64, 48))
        # input order must not change who wins the depth sort
        flipped = render_frame(cam, [(far, p_far), (near, p_near)])
        near_as_second = render_frame(cam, [(far, p_gone), (near, p_near)])
        assert flipped.getpixel((64, 48)) == near_as_second.getpixel((64, 48))

    def test_behind_camera_mesh_is_skipped(self):
        cam = self._cam()
        mesh = box(1.0, 1.0, 1.0, model_id="b", category="chair")
        behind = Pose9DoF(T=np.array([0.0, 0.0, -10.0]), R=np.eye(3), S=np.ones(3))
        img = render_frame(cam, [(mesh, behind)])
        assert img.tobytes() == render_frame(cam, []).tobytes()

    def test_render_scene_frames_writes_pngs(self, tmp_path):
        spec = SyntheticSpec(n_objects=2, image_size=(96, 64),
                             intrinsics=(60.0, 60.0, 48.0, 32.0))
        synth = generate_synthetic_scene(spec, seed=3)
        objs = [(o.mesh, o.pose) for o in synth.objects]
        paths = render_scene_frames(synth.scene, objs, tmp_path / "imgs")
        assert len(paths) == len(synth.scene.frames)
        for p, f in zip(paths, synth.scene.frames):
            assert p.endswith(f"{f.camera.frame_id:06d}.png")
        from PIL import Image
        with Image.open(paths[0]) as im:
            assert im.size == (96, 64)
