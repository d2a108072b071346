"""Aggregation of generative-model samples into predicted distributions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CameraModel, ConfidenceCloud, back_project_pixels, concat_clouds
from .grid import ImageDomain, SpatialDistribution, VoxelDomain, softmax_normalize, voxelize_nonzero_mean


@dataclass(frozen=True)
class RegionCounts:
    """Yes-answer counts per left/center/right region from n_s binary queries."""

    yes: tuple  # (left, center, right)
    queries: tuple

    def __post_init__(self):
        if len(self.yes) != 3 or len(self.queries) != 3:
            raise ValueError("expected counts for exactly three regions")
        for y, q in zip(self.yes, self.queries):
            if q <= 0:
                raise ValueError("each region needs at least one query")
            if not (0 <= y <= q):
                raise ValueError("yes counts must lie in [0, queries]")

    def fractions(self) -> np.ndarray:
        return np.asarray(self.yes, dtype=float) / np.asarray(self.queries, dtype=float)


def aggregate_2d(confidence_maps, domain: ImageDomain, label: str = "") -> SpatialDistribution:
    """Mean the per-sample confidence maps over the expanded image, then softmax."""
    maps = [np.asarray(m, dtype=float) for m in confidence_maps]
    if not maps:
        raise ValueError("need at least one sample")
    for m in maps:
        if m.shape != domain.shape:
            raise ValueError("all confidence maps must share the expanded image extent")
    raw = np.mean(maps, axis=0)
    return softmax_normalize(raw, domain, label=label, kind="2d")


def aggregate_3d(clouds, domain: VoxelDomain, label: str = "") -> SpatialDistribution:
    """Concatenate posed sample clouds (already in the input-camera frame),
    average non-zero confidences per voxel, and softmax."""
    clouds = list(clouds)
    merged = concat_clouds(clouds)
    if label:
        merged = merged.for_label(label)
    if len(merged) == 0:
        raise ValueError("no sample points to aggregate")
    raw = voxelize_nonzero_mean(merged.points, merged.confidences, domain)
    return softmax_normalize(raw, domain, label=label, kind="3d")


def lift_2d_to_25d(
    dist2d: SpatialDistribution,
    depth: np.ndarray,
    cam: CameraModel,
    domain: VoxelDomain,
    far: float = 10.0,
) -> SpatialDistribution:
    """Unproject a 2D distribution into the 2.5D voxel grid using metric depth.

    Every pixel with positive mass and a depth in (0, far] is back-projected at
    its depth, carrying its mass as the point confidence; the cloud is then
    voxelized with non-zero-mean pooling and softmaxed.
    """
    if depth is None:
        raise ValueError("a depth map is required")
    depth = np.asarray(depth, dtype=float)
    if depth.shape != dist2d.values.shape:
        raise ValueError("depth map must match the 2D domain extent")
    mask = (dist2d.values > 0) & np.isfinite(depth) & (depth > 0) & (depth <= far)
    if not np.any(mask):
        raise ValueError("no pixel projects inside the far plane")
    rows, cols = np.nonzero(mask)
    pixels = np.stack([cols + 0.5, rows + 0.5], axis=1)
    pts = back_project_pixels(pixels, depth[rows, cols], cam)
    conf = dist2d.values[rows, cols]
    # normalized masses can exceed nothing: they are probabilities, hence valid confidences
    raw = voxelize_nonzero_mean(pts, conf, domain)
    return softmax_normalize(raw, domain, label=dist2d.label, kind="2.5d")


def vlm_region_distribution(counts: RegionCounts, domain: ImageDomain, label: str = "") -> SpatialDistribution:
    """Turn per-region yes-fractions into a region-constant 2D distribution.

    The three fractions are softmax-normalized into region masses; each mass is
    spread uniformly over its region's pixels so the grid sums to 1.
    """
    scores = counts.fractions()
    shifted = np.exp(scores - scores.max())
    masses = shifted / shifted.sum()
    values = np.zeros(domain.shape, dtype=float)
    for sl, mass in zip(domain.region_slices(), masses):
        n_pix = domain.height * (sl.stop - sl.start)
        values[:, sl] = mass / n_pix
    values /= values.sum()
    return SpatialDistribution(domain=domain, values=values, label=label, kind="2d")
