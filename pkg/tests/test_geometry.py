import numpy as np
import pytest

from ssdbench import (
    CameraModel,
    ConfidenceCloud,
    RigidTransform,
    back_project,
    clip_depth,
    frustum_cull,
    outlier_filter,
    project,
    project_points,
    transform_cloud,
    z_cull,
)


def make_cam(fx=100.0, fy=100.0, cx=180.0, cy=180.0, width=360, height=360, pose=None):
    return CameraModel(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height,
                       pose=pose or RigidTransform.identity())


def make_cloud(points, conf=None, label="obj"):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    conf = np.full(n, 0.5) if conf is None else np.asarray(conf, dtype=float)
    return ConfidenceCloud(points, conf, np.full(n, label, dtype=object))


class TestProject:
    def test_principal_point(self):
        pixel, depth = project(np.array([0.0, 0.0, 3.0]), make_cam())
        assert np.allclose(pixel, [180.0, 180.0])
        assert depth == 3.0

    def test_behind_camera(self):
        assert project(np.array([0.0, 0.0, -1.0]), make_cam()) is None

    def test_pinhole_formula(self):
        pixel, depth = project(np.array([1.0, 0.0, 2.0]), make_cam())
        assert pixel[0] == pytest.approx(230.0)
        assert depth == 2.0

    def test_pose_is_applied(self):
        pose = RigidTransform(np.eye(3), np.array([0.0, 0.0, 2.0]))
        pixel, depth = project(np.array([0.0, 0.0, 1.0]), make_cam(pose=pose))
        assert depth == pytest.approx(3.0)


class TestBackProject:
    def test_optical_axis(self):
        assert np.allclose(back_project(np.array([180.0, 180.0]), 4.0, make_cam()), [0, 0, 4])

    def test_inverse_of_projection(self):
        pt = back_project(np.array([230.0, 180.0]), 2.0, make_cam())
        assert np.allclose(pt, [1.0, 0.0, 2.0])

    def test_round_trip(self):
        cam = make_cam()
        rng = np.random.default_rng(3)
        for _ in range(100):
            pix = rng.uniform(0, 359.99, size=2)
            d = rng.uniform(0.1, 50.0)
            back = back_project(pix, d, cam)
            pix2, d2 = project(back, cam)
            assert np.max(np.abs(pix2 - pix)) < 1e-9
            assert abs(d2 - d) < 1e-9

    def test_nonpositive_depth_rejected(self):
        with pytest.raises(ValueError):
            back_project(np.array([180.0, 180.0]), 0.0, make_cam())


class TestTransformCloud:
    def test_identity(self):
        cloud = make_cloud([[1, 2, 3], [4, 5, 6]])
        out = transform_cloud(cloud, RigidTransform.identity())
        assert np.allclose(out.points, cloud.points)
        assert np.array_equal(out.confidences, cloud.confidences)

    def test_translation(self):
        cloud = make_cloud([[1, 2, 3]])
        out = transform_cloud(cloud, RigidTransform(np.eye(3), np.array([1.0, -1.0, 0.5])))
        assert np.allclose(out.points, [[2, 1, 3.5]])

    def test_rotation_about_z(self):
        rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        out = transform_cloud(make_cloud([[1, 0, 0]]), RigidTransform(rot, np.zeros(3)))
        assert np.max(np.abs(out.points - [[0, 1, 0]])) < 1e-12

    def test_distances_preserved(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(30, 3))
        theta = 0.7
        rot = np.array([
            [np.cos(theta), -np.sin(theta), 0],
            [np.sin(theta), np.cos(theta), 0],
            [0, 0, 1],
        ])
        out = transform_cloud(make_cloud(pts), RigidTransform(rot, np.array([1.0, 2.0, 3.0])))
        d0 = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        d1 = np.linalg.norm(out.points[:, None] - out.points[None], axis=-1)
        assert np.max(np.abs(d0 - d1)) < 1e-9


class TestFrustumCull:
    def test_behind_removed(self):
        out = frustum_cull(make_cloud([[0, 0, -2]]), make_cam(), near=0.1, far=10)
        assert len(out) == 0

    def test_on_axis_retained(self):
        out = frustum_cull(make_cloud([[0, 0, 5.05]]), make_cam(), near=0.1, far=10)
        assert len(out) == 1

    def test_matches_per_point_check(self):
        # 90-degree FOV camera: fx = cx = half the image width
        cam = make_cam(fx=180.0, fy=180.0)
        rng = np.random.default_rng(11)
        pts = rng.uniform(-6, 6, size=(200, 3))
        near, far = 0.5, 5.0
        out = frustum_cull(make_cloud(pts), cam, near=near, far=far)
        expected = []
        for p in pts:
            res = project(p, cam)
            if res is not None and near <= res[1] <= far:
                expected.append(p)
        assert np.allclose(out.points, np.asarray(expected).reshape(-1, 3))

    def test_idempotent(self):
        cam = make_cam()
        rng = np.random.default_rng(12)
        cloud = make_cloud(rng.uniform(-3, 3, size=(100, 3)))
        once = frustum_cull(cloud, cam, near=0.1, far=4.0)
        twice = frustum_cull(once, cam, near=0.1, far=4.0)
        assert np.array_equal(once.points, twice.points)


class TestZCull:
    def test_nearest_wins(self):
        cloud = make_cloud([[0, 0, 5], [0, 0, 2]])
        out = z_cull(cloud, make_cam())
        assert len(out) == 1
        assert out.points[0, 2] == 2

    def test_distinct_pixels_all_kept(self):
        cloud = make_cloud([[0, 0, 2], [1, 0, 2]])
        assert len(z_cull(cloud, make_cam())) == 2

    def test_tie_first_in_input_wins(self):
        cloud = make_cloud([[0, 0, 2], [0.001, 0.0, 2.0]], conf=[0.9, 0.1])
        out = z_cull(cloud, make_cam())
        assert len(out) == 1
        assert out.confidences[0] == 0.9

    def test_matches_brute_force(self):
        cam = make_cam(fx=50, fy=50, cx=10, cy=10, width=20, height=20)
        rng = np.random.default_rng(21)
        pts = np.column_stack([
            rng.uniform(-0.2, 0.2, 100), rng.uniform(-0.2, 0.2, 100), rng.uniform(1, 5, 100),
        ])
        cloud = make_cloud(pts)
        out = z_cull(cloud, cam)
        pixels, depths, in_view = project_points(pts, cam)
        best = {}
        for i in range(len(pts)):
            if not in_view[i]:
                continue
            key = (int(np.floor(pixels[i, 0])), int(np.floor(pixels[i, 1])))
            if key not in best or depths[i] < depths[best[key]]:
                best[key] = i
        keep = sorted(best.values())
        assert np.array_equal(out.points, pts[keep])

    def test_idempotent(self):
        cam = make_cam(fx=50, fy=50, cx=10, cy=10, width=20, height=20)
        rng = np.random.default_rng(22)
        cloud = make_cloud(np.column_stack([
            rng.uniform(-0.1, 0.1, 50), rng.uniform(-0.1, 0.1, 50), rng.uniform(1, 3, 50),
        ]))
        once = z_cull(cloud, cam)
        assert np.array_equal(once.points, z_cull(once, cam).points)


class TestClipDepth:
    def test_threshold_boundary(self):
        cloud = make_cloud([[0, 0, 9.9], [0, 0, 10.1]])
        out = clip_depth(cloud, make_cam())
        assert np.allclose(out.points, [[0, 0, 9.9]])

    def test_empty(self):
        assert len(clip_depth(ConfidenceCloud.empty(), make_cam())) == 0

    def test_matches_filter(self):
        rng = np.random.default_rng(31)
        pts = rng.uniform(-2, 15, size=(200, 3))
        out = clip_depth(make_cloud(pts), make_cam(), max_depth=10.0)
        assert np.allclose(out.points, pts[pts[:, 2] <= 10.0])


class TestOutlierFilter:
    def test_far_point_removed(self):
        rng = np.random.default_rng(41)
        pts = np.vstack([rng.normal(0, 0.1, size=(50, 3)), [[100.0, 0.0, 0.0]]])
        out = outlier_filter(make_cloud(pts), k=20)
        assert len(out) == 50
        assert np.all(out.points[:, 0] < 50)
        # brute-force kNN mean/std oracle
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        knn_means = np.sort(d, axis=1)[:, 1:21].mean(axis=1)
        expected = knn_means <= knn_means.mean() + 2.0 * knn_means.std()
        assert np.array_equal(out.points, pts[expected])

    def test_small_cloud_unchanged(self):
        rng = np.random.default_rng(42)
        pts = np.vstack([rng.normal(0, 0.1, size=(19, 3)), [[100.0, 0.0, 0.0]]])
        out = outlier_filter(make_cloud(pts), k=20)
        assert len(out) == 20

    def test_symmetric_ring_unchanged(self):
        t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        pts = np.column_stack([np.cos(t), np.sin(t), np.zeros(60)])
        assert len(outlier_filter(make_cloud(pts), k=20)) == 60


class TestValidation:
    def test_bad_rotation_rejected(self):
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 2.0, np.zeros(3))

    def test_reflection_rejected(self):
        R = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            RigidTransform(R, np.zeros(3))

    def test_confidence_bounds(self):
        with pytest.raises(ValueError):
            make_cloud([[0, 0, 1]], conf=[1.5])

    def test_nonfinite_coordinates(self):
        with pytest.raises(ValueError):
            make_cloud([[np.inf, 0, 1]])

    def test_camera_invariants(self):
        with pytest.raises(ValueError):
            CameraModel(fx=-1, fy=1, cx=0, cy=0, width=10, height=10)
        with pytest.raises(ValueError):
            CameraModel(fx=1, fy=1, cx=20, cy=0, width=10, height=10)
