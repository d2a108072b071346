"""Ground-truth distribution construction from posed detections and depths."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (
    CameraModel,
    ConfidenceCloud,
    back_project_pixels,
    clip_depth,
    concat_clouds,
    frustum_cull,
    transform_cloud,
    z_cull,
)
from .grid import ImageDomain, SpatialDistribution, Thresholds, VoxelDomain, softmax_normalize, voxelize_nonzero_mean


@dataclass
class Detection:
    """A labeled 2D bounding box with detector confidence on one image."""

    image_id: str
    label: str
    bbox: tuple  # (x_min, y_min, x_max, y_max) in pixels
    confidence: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence must lie in [0, 1]")


@dataclass
class PosedFrame:
    """One posed image with its detections and optional per-pixel depth map."""

    image_id: str
    camera: CameraModel
    detections: list = field(default_factory=list)
    depth: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.depth is not None:
            self.depth = np.asarray(self.depth, dtype=float)
            if self.depth.shape != (self.camera.height, self.camera.width):
                raise ValueError("depth map does not match the camera extent")


def detection_confidence_map(detections, label: str, height: int, width: int, tau_conf: float = 0.1) -> np.ndarray:
    """Per-pixel raw confidence: the max confidence over covering boxes.

    Detections of other labels or at/below the confidence floor are ignored.
    """
    raw = np.zeros((height, width), dtype=float)
    for det in detections:
        if det.label != label or det.confidence <= tau_conf:
            continue
        x0, y0, x1, y1 = det.bbox
        c0 = max(0, int(math.floor(x0)))
        c1 = min(width, int(math.ceil(x1)))
        r0 = max(0, int(math.floor(y0)))
        r1 = min(height, int(math.ceil(y1)))
        if c0 < c1 and r0 < r1:
            region = raw[r0:r1, c0:c1]
            np.maximum(region, det.confidence, out=region)
    return raw


def gt_2d(frame: PosedFrame, label: str, domain: ImageDomain, thr: Thresholds = Thresholds()) -> Optional[SpatialDistribution]:
    """2D ground truth on the expanded image domain, or None when the label is
    absent (the pair is then excluded from the dataset)."""
    if (frame.camera.height, frame.camera.width) != domain.shape:
        raise ValueError("frame extent does not match the expanded image domain")
    raw = detection_confidence_map(frame.detections, label, domain.height, domain.width_full, thr.tau_conf)
    if not np.any(raw > 0):
        return None
    return softmax_normalize(raw, domain, label=label, kind="2d")


def build_label_cloud(frames, label: str, tau_conf: float = 0.1) -> ConfidenceCloud:
    """Back-project bbox-pixel confidences through each frame's depth map into
    a world-frame cloud.  Pixels without a reconstructed depth are skipped."""
    clouds = []
    for frame in frames:
        if frame.depth is None:
            continue
        cam = frame.camera
        raw = detection_confidence_map(frame.detections, label, cam.height, cam.width, tau_conf)
        rows, cols = np.nonzero(raw > 0)
        if rows.size == 0:
            continue
        depths = frame.depth[rows, cols]
        valid = np.isfinite(depths) & (depths > 0)
        if not np.any(valid):
            continue
        rows, cols, depths = rows[valid], cols[valid], depths[valid]
        pixels = np.stack([cols + 0.5, rows + 0.5], axis=1)  # pixel centers
        pts_cam = back_project_pixels(pixels, depths, cam)
        pts_world = cam.pose.inverse().apply(pts_cam)
        clouds.append(
            ConfidenceCloud(pts_world, raw[rows, cols], np.full(rows.size, label, dtype=object))
        )
    return concat_clouds(clouds)


def gt_3d(
    frames,
    label: str,
    domain: VoxelDomain,
    input_cam: Optional[CameraModel] = None,
    thr: Thresholds = Thresholds(),
) -> Optional[SpatialDistribution]:
    """3D ground truth: back-project, voxelize by non-zero-mean pooling, softmax.

    The voxel grid is anchored to the input camera; when input_cam is given the
    world cloud is moved into its frame first, otherwise world coordinates are
    taken to already be the grid frame.
    """
    cloud = build_label_cloud(frames, label, thr.tau_conf)
    if len(cloud) == 0:
        return None
    if input_cam is not None:
        cloud = transform_cloud(cloud, input_cam.pose)
    raw = voxelize_nonzero_mean(cloud.points, cloud.confidences, domain)
    if not np.any(raw > 0):
        return None
    return softmax_normalize(raw, domain, label=label, kind="3d")


def gt_25d(
    frames,
    label: str,
    input_cam: CameraModel,
    domain: VoxelDomain,
    thr: Thresholds = Thresholds(),
    near: float = 1e-3,
    max_depth: float = 10.0,
) -> Optional[SpatialDistribution]:
    """2.5D ground truth: like gt_3d but restricted to the visible frustum of
    the input camera via frustum culling, Z-culling, and depth clipping."""
    cloud = build_label_cloud(frames, label, thr.tau_conf)
    if len(cloud) == 0:
        return None
    cloud = frustum_cull(cloud, input_cam, near=near)
    cloud = z_cull(cloud, input_cam)
    cloud = clip_depth(cloud, input_cam, max_depth=max_depth)
    if len(cloud) == 0:
        return None
    cloud = transform_cloud(cloud, input_cam.pose)
    raw = voxelize_nonzero_mean(cloud.points, cloud.confidences, domain)
    if not np.any(raw > 0):
        return None
    return softmax_normalize(raw, domain, label=label, kind="2.5d")
