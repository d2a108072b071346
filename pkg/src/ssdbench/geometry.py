"""Pinhole cameras, rigid transforms, and point-cloud culling/filtering."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

ROTATION_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """World-to-camera rigid transform: x_cam = R @ x_world + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if not np.allclose(R @ R.T, np.eye(3), atol=ROTATION_TOL):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-6:
            raise ValueError("rotation determinant must be +1")

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus a world-to-camera pose.

    Convention: +Z forward, +X right, +Y down, pixel origin at the top-left.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point must lie within the image extent")


@dataclass
class ConfidenceCloud:
    """3D points, each carrying a per-object confidence in [0, 1] and a label."""

    points: np.ndarray
    confidences: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.confidences = np.asarray(self.confidences, dtype=float).reshape(-1)
        self.labels = np.asarray(self.labels, dtype=object).reshape(-1)
        n = self.points.shape[0]
        if self.confidences.shape[0] != n or self.labels.shape[0] != n:
            raise ValueError("points, confidences, and labels must have equal length")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")
        if np.any(self.confidences < 0) or np.any(self.confidences > 1):
            raise ValueError("confidences must lie in [0, 1]")

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def empty(cls) -> "ConfidenceCloud":
        return cls(np.zeros((0, 3)), np.zeros(0), np.zeros(0, dtype=object))

    def select(self, mask: np.ndarray) -> "ConfidenceCloud":
        return ConfidenceCloud(self.points[mask], self.confidences[mask], self.labels[mask])

    def for_label(self, label: str) -> "ConfidenceCloud":
        return self.select(self.labels == label)


def concat_clouds(clouds) -> ConfidenceCloud:
    clouds = list(clouds)
    if not clouds:
        return ConfidenceCloud.empty()
    return ConfidenceCloud(
        np.concatenate([c.points for c in clouds]),
        np.concatenate([c.confidences for c in clouds]),
        np.concatenate([c.labels for c in clouds]),
    )


def project_points(points: np.ndarray, cam: CameraModel):
    """Project world points; returns (pixels (N,2), depths (N,), in_view (N,)).

    A point is in view iff its camera-frame depth is positive and its pixel
    falls inside [0, width) x [0, height).
    """
    pts_c = cam.pose.apply(np.atleast_2d(points))
    z = pts_c[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        px = cam.fx * pts_c[:, 0] / z + cam.cx
        py = cam.fy * pts_c[:, 1] / z + cam.cy
    pixels = np.stack([px, py], axis=1)
    in_view = (
        (z > 0)
        & (px >= 0) & (px < cam.width)
        & (py >= 0) & (py < cam.height)
    )
    return pixels, z, in_view


def project(point: np.ndarray, cam: CameraModel):
    """Project a single world point; None when out of view."""
    pixels, depths, in_view = project_points(np.asarray(point, dtype=float)[None, :], cam)
    if not in_view[0]:
        return None
    return pixels[0], float(depths[0])


def back_project_pixels(pixels: np.ndarray, depths: np.ndarray, cam: CameraModel) -> np.ndarray:
    """Lift pixels at the given depths to camera-frame 3D points."""
    px = np.atleast_2d(pixels)
    d = np.asarray(depths, dtype=float).reshape(-1)
    if np.any(d <= 0):
        raise ValueError("depth must be positive")
    x = (px[:, 0] - cam.cx) * d / cam.fx
    y = (px[:, 1] - cam.cy) * d / cam.fy
    return np.stack([x, y, d], axis=1)


def back_project(pixel: np.ndarray, depth: float, cam: CameraModel) -> np.ndarray:
    return back_project_pixels(np.asarray(pixel, dtype=float)[None, :], [depth], cam)[0]


def transform_cloud(cloud: ConfidenceCloud, pose: RigidTransform) -> ConfidenceCloud:
    """Rigidly move a cloud; confidences and labels are untouched."""
    return ConfidenceCloud(pose.apply(cloud.points), cloud.confidences.copy(), cloud.labels.copy())


def frustum_cull(cloud: ConfidenceCloud, cam: CameraModel, near: float = 1e-3, far: float = np.inf) -> ConfidenceCloud:
    """Keep points with near <= depth <= far that project inside the image."""
    if not (0 < near < far):
        raise ValueError("require 0 < near < far")
    if len(cloud) == 0:
        return cloud
    pixels, depths, in_view = project_points(cloud.points, cam)
    keep = in_view & (depths >= near) & (depths <= far)
    return cloud.select(keep)


def z_cull(cloud: ConfidenceCloud, cam: CameraModel) -> ConfidenceCloud:
    """Depth-buffer occlusion: per integer pixel, keep only the nearest point.

    Ties at exactly equal depth go to the earlier point in input order.
    Expects an already frustum-culled cloud; points out of view are dropped.
    """
    if len(cloud) == 0:
        return cloud
    pixels, depths, in_view = project_points(cloud.points, cam)
    idx = np.nonzero(in_view)[0]
    if idx.size == 0:
        return cloud.select(in_view)
    keys = (
        np.floor(pixels[idx, 1]).astype(np.int64) * cam.width
        + np.floor(pixels[idx, 0]).astype(np.int64)
    )
    order = np.argsort(depths[idx], kind="stable")
    _, first = np.unique(keys[order], return_index=True)
    winners = np.sort(idx[order[first]])
    mask = np.zeros(len(cloud), dtype=bool)
    mask[winners] = True
    return cloud.select(mask)


def clip_depth(cloud: ConfidenceCloud, cam: CameraModel, max_depth: float = 10.0) -> ConfidenceCloud:
    """Drop points whose camera-frame depth exceeds max_depth."""
    if max_depth <= 0:
        raise ValueError("max_depth must be positive")
    if len(cloud) == 0:
        return cloud
    depths = cam.pose.apply(cloud.points)[:, 2]
    return cloud.select(depths <= max_depth)


def outlier_filter(cloud: ConfidenceCloud, k: int = 20, sigma_mult: float = 2.0) -> ConfidenceCloud:
    """Statistical outlier removal via mean k-nearest-neighbor distances.

    A point is removed when its mean distance to its k nearest neighbors
    exceeds the global mean by more than sigma_mult standard deviations.
    Clouds of k or fewer points are returned unchanged.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(cloud) <= k:
        return cloud
    tree = cKDTree(cloud.points)
    dists, _ = tree.query(cloud.points, k=k + 1)
    mean_dists = dists[:, 1:].mean(axis=1)
    gate = mean_dists.mean() + sigma_mult * mean_dists.std()
    return cloud.select(mean_dists <= gate)
