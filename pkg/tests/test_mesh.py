import numpy as np
import pytest

from cadkit.geometry import CameraFrame, Pose9DoF, rotation_about_axis
from cadkit.mesh import (
    MeshError,
    ObjParseError,
    SymmetryClass,
    TriangleMesh,
    detect_symmetry,
    dump_mesh,
    load_mesh,
    sample_surface,
    truncation_fraction,
)
from cadkit.primitives import box, l_extrusion, ngon_prism, tapered_wedge

CUBE_OBJ = """\
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
"""


class TestLoadMesh:
    def test_cube(self):
        mesh = load_mesh(CUBE_OBJ)
        assert mesh.vertices.shape == (8, 3)
        assert mesh.triangles.shape == (12, 3)

    def test_quad_fan_triangulated(self):
        obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"
        mesh = load_mesh(obj)
        assert mesh.triangles.shape == (2, 3)

    def test_index_out_of_range(self):
        obj = CUBE_OBJ + "f 1 2 99\n"
        with pytest.raises(ObjParseError) as exc:
            load_mesh(obj)
        assert "99" in str(exc.value)
        assert exc.value.line_no == 21

    def test_empty_mesh(self):
        with pytest.raises(MeshError):
            load_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\n")

    def test_bad_vertex(self):
        with pytest.raises(ObjParseError):
            load_mesh("v 0 zero 0\nf 1 1 1\n")

    def test_slash_indices_and_negative(self):
        obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 -1/3\n"
        mesh = load_mesh(obj)
        assert np.array_equal(mesh.triangles, [[0, 1, 2]])

    def test_bytes_input_and_roundtrip(self):
        mesh = load_mesh(CUBE_OBJ.encode())
        again = load_mesh(dump_mesh(mesh))
        assert np.allclose(mesh.vertices, again.vertices)
        assert np.array_equal(mesh.triangles, again.triangles)


class TestSampleSurface:
    def test_single_triangle_in_plane(self):
        mesh = TriangleMesh(vertices=[[0, 0, 0], [2, 0, 0], [0, 2, 0]], triangles=[[0, 1, 2]])
        pts = sample_surface(mesh, 1000, seed=0)
        assert np.allclose(pts[:, 2], 0)
        # inside the triangle: x,y >= 0 and x+y <= 2
        assert (pts[:, 0] >= 0).all() and (pts[:, 1] >= 0).all()
        assert (pts[:, 0] + pts[:, 1] <= 2 + 1e-12).all()

    def test_area_proportional_split(self):
        # two triangles with area ratio 9:1 -> counts split 9:1 within 5%
        mesh = TriangleMesh(
            vertices=[[0, 0, 0], [9, 0, 0], [0, 2, 0], [9, 2, 0], [10, 0, 0], [10, 2, 0]],
            triangles=[[0, 1, 2], [4, 5, 3]],
        )
        areas = mesh.triangle_areas()
        assert areas[0] / areas[1] == pytest.approx(9.0)
        pts = sample_surface(mesh, 10_000, seed=3)
        frac_big = np.mean(pts[:, 0] <= 9.0 + 1e-9)
        assert abs(frac_big - 0.9) < 0.05

    def test_deterministic(self):
        mesh = box(1, 1, 1)
        assert np.array_equal(sample_surface(mesh, 500, seed=7), sample_surface(mesh, 500, seed=7))

    def test_bad_n(self):
        with pytest.raises(MeshError):
            sample_surface(box(), 0)

    def test_degenerate_area(self):
        mesh = TriangleMesh(vertices=[[0, 0, 0], [1, 1, 1], [2, 2, 2]], triangles=[[0, 1, 2]])
        with pytest.raises(MeshError):
            sample_surface(mesh, 10)


class TestDetectSymmetry:
    def test_unit_cube_order_4(self):
        assert detect_symmetry(box(1, 1, 1)).order == 4

    def test_rect_box_order_2(self):
        assert detect_symmetry(box(2, 1, 1)).order == 2

    def test_cylinder_proxy_order_36(self):
        assert detect_symmetry(ngon_prism(72)).order == 36

    def test_l_extrusion_order_1(self):
        assert detect_symmetry(l_extrusion()).order == 1

    def test_wedge_order_1(self):
        assert detect_symmetry(tapered_wedge()).order == 1

    def test_never_over_reports(self):
        # an order-2 box must not report 4 or 36
        for mesh in (box(2, 1, 1), box(1.4, 0.7, 1.0), box(0.6, 3.0, 0.5)):
            assert detect_symmetry(mesh).order == 2

    def test_invariant_to_vertex_reordering(self):
        mesh = box(1, 2, 1)
        rng = np.random.default_rng(5)
        perm = rng.permutation(len(mesh.vertices))
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        shuffled = TriangleMesh(vertices=mesh.vertices[perm], triangles=inv[mesh.triangles])
        assert detect_symmetry(shuffled).order == detect_symmetry(mesh).order == 4

    def test_invariant_to_symmetry_rotation(self):
        mesh = box(2, 1, 1)
        order = detect_symmetry(mesh).order
        rot = rotation_about_axis(mesh.up_axis, 2 * np.pi / order)
        rotated = TriangleMesh(vertices=mesh.vertices @ rot.T, triangles=mesh.triangles)
        assert detect_symmetry(rotated).order == order

    def test_symmetry_class_validation(self):
        with pytest.raises(MeshError):
            SymmetryClass(order=3)
        elems = SymmetryClass(order=4, axis=[0, 1, 0]).elements()
        assert len(elems) == 4
        assert np.allclose(elems[0], np.eye(3))


def look_at_camera(eye, target, fx=800.0, size=(800, 600), frame_id=0, world_up=(0, 1, 0)):
    """Camera at `eye` looking at `target`, +z forward, +y down in image."""
    eye = np.asarray(eye, float)
    fwd = np.asarray(target, float) - eye
    fwd = fwd / np.linalg.norm(fwd)
    up = np.asarray(world_up, float)
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-9:
        right = np.cross(fwd, [1.0, 0, 0])
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    r_c = np.stack([right, down, fwd])
    t_c = -r_c @ eye
    w, h = size
    return CameraFrame(
        frame_id=frame_id,
        intrinsics=(fx, fx, w / 2.0, h / 2.0),
        extrinsics=np.hstack([r_c, t_c[:, None]]),
        image_size=size,
    )


class TestTruncation:
    def test_fully_visible(self):
        cam = look_at_camera([0, 0, -5], [0, 0, 0])
        frac = truncation_fraction(box(1, 1, 1), Pose9DoF.identity(), cam, n=2000, seed=0)
        assert frac == 0.0

    def test_fully_behind(self):
        cam = look_at_camera([0, 0, 5], [0, 0, 10])
        frac = truncation_fraction(box(1, 1, 1), Pose9DoF.identity(), cam, n=500, seed=0)
        assert frac == 1.0

    def test_straddling_edge_half(self):
        # flat unit square facing an orthogonal camera, centered exactly on
        # the right image edge: analytically half the surface projects out
        mesh = TriangleMesh(
            vertices=[[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.5, 0.5, 0], [-0.5, 0.5, 0]],
            triangles=[[0, 1, 2], [0, 2, 3]],
        )
        cam = CameraFrame(
            frame_id=0,
            intrinsics=(100.0, 100.0, 400.0, 300.0),
            extrinsics=np.hstack([np.eye(3), np.array([[0, 0, 2.0]]).T]),
            image_size=(800, 600),
        )
        # right edge at u=800 -> x/z = 4 -> x = 8 at z=2; place square center there
        pose = Pose9DoF(T=[8, 0, 0], R=np.eye(3), S=[1, 1, 1])
        frac = truncation_fraction(mesh, pose, cam, n=20_000, seed=1)
        assert abs(frac - 0.5) < 0.02

    def test_monotone_under_pan_out(self):
        mesh = box(1, 1, 1)
        fracs = []
        for shift in np.linspace(0, 6, 13):
            cam = look_at_camera([0, 0, -5], [0, 0, 0])
            pose = Pose9DoF(T=[shift, 0, 0], R=np.eye(3), S=[1, 1, 1])
            fracs.append(truncation_fraction(mesh, pose, cam, n=4000, seed=2))
        assert all(b >= a - 1e-9 for a, b in zip(fracs, fracs[1:]))
        assert fracs[0] == 0.0 and fracs[-1] == 1.0

    def test_min_samples(self):
        cam = look_at_camera([0, 0, -5], [0, 0, 0])
        with pytest.raises(MeshError):
            truncation_fraction(box(), Pose9DoF.identity(), cam, n=50)
