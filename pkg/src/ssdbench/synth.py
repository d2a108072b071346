"""Synthetic scenes with analytically known distributions, plus a simulated
sampler, so the full build/aggregate/evaluate pipeline can be tested against a
closed-form answer."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraModel, ConfidenceCloud, concat_clouds, project_points
from .grid import SpatialDistribution, Thresholds, VoxelDomain
from .groundtruth import Detection
from .metrics import PairMetrics, evaluate_pair


@dataclass(frozen=True)
class SceneObject:
    """One mixture component: instances appear uniformly inside its box.

    A non-detectable object carries probability mass the simulated detector
    never observes (a diffuse prior component).
    """

    label: str
    center: tuple
    extent: tuple
    weight: float = 1.0
    detectable: bool = True

    @property
    def box_min(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float) - np.asarray(self.extent, dtype=float) / 2.0

    @property
    def box_max(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float) + np.asarray(self.extent, dtype=float) / 2.0


@dataclass
class SyntheticScene:
    room_min: np.ndarray
    room_max: np.ndarray
    objects: list
    domain: VoxelDomain
    analytic: dict = field(default_factory=dict)  # label -> SpatialDistribution

    def labels(self):
        seen = []
        for obj in self.objects:
            if obj.label not in seen:
                seen.append(obj.label)
        return seen


def _box_voxel_masses(box_min, box_max, domain: VoxelDomain) -> np.ndarray:
    """Exact fraction of a box's volume inside each voxel."""
    overlaps = []
    for axis in range(3):
        lo, hi = domain.cell_bounds(axis)
        ov = np.clip(np.minimum(hi, box_max[axis]) - np.maximum(lo, box_min[axis]), 0.0, None)
        overlaps.append(ov)
    vol = overlaps[0][:, None, None] * overlaps[1][None, :, None] * overlaps[2][None, None, :]
    box_volume = float(np.prod(box_max - box_min))
    if box_volume <= 0:
        raise ValueError("object extent must be positive in every dimension")
    return vol / box_volume


def make_scene(room_min, room_max, objects, domain: VoxelDomain) -> SyntheticScene:
    """Build a scene and its exact per-label voxel distributions.

    Per label, the distribution is the weight-normalized mixture of the
    uniform-in-box components, integrated exactly over voxel cells.
    """
    room_min = np.asarray(room_min, dtype=float)
    room_max = np.asarray(room_max, dtype=float)
    if np.any(room_min >= room_max):
        raise ValueError("degenerate room extent")
    scene = SyntheticScene(room_min, room_max, list(objects), domain)
    if not scene.objects:
        raise ValueError("scene needs at least one object")
    for obj in scene.objects:
        if np.any(obj.box_min < room_min - 1e-12) or np.any(obj.box_max > room_max + 1e-12):
            raise ValueError(f"object {obj.label!r} lies outside the room")
        if obj.weight <= 0:
            raise ValueError("mixture weights must be positive")
    for label in scene.labels():
        comps = [o for o in scene.objects if o.label == label]
        total_w = sum(o.weight for o in comps)
        values = np.zeros(domain.shape, dtype=float)
        for obj in comps:
            values += (obj.weight / total_w) * _box_voxel_masses(obj.box_min, obj.box_max, domain)
        total = values.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"mixture for {label!r} leaks outside the voxel domain")
        scene.analytic[label] = SpatialDistribution(
            domain=domain, values=values / total, label=label, kind="3d"
        )
    return scene


@dataclass(frozen=True)
class SimulatedSampler:
    """Draws reproducible synthetic samples from a scene's mixture."""

    scene: SyntheticScene
    detection_noise: float = 0.0
    miss_rate: float = 0.0
    instances_per_draw: int = 1
    points_per_instance: int = 32
    instance_extent: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.miss_rate < 1.0):
            raise ValueError("miss_rate must lie in [0, 1)")
        if self.detection_noise < 0:
            raise ValueError("noise std must be non-negative")


def _sample_box_surface(rng, center, extent, n):
    """Uniform points on the six faces of a box, area-weighted."""
    e = np.asarray(extent, dtype=float)
    face_areas = np.array([e[1] * e[2], e[0] * e[2], e[0] * e[1]])
    probs = np.repeat(face_areas, 2)
    probs = probs / probs.sum()
    faces = rng.choice(6, size=n, p=probs)
    pts = rng.uniform(-0.5, 0.5, size=(n, 3)) * e
    axes = faces // 2
    signs = np.where(faces % 2 == 0, -0.5, 0.5)
    pts[np.arange(n), axes] = signs * e[axes]
    return pts + np.asarray(center, dtype=float)


def draw_sample(sampler: SimulatedSampler, cam: CameraModel, index: int = 0):
    """One generative sample: detections plus a posed confidence cloud.

    Bit-identical for a fixed (seed, index); independent draws use the draw
    index to split the seed stream.
    """
    rng = np.random.default_rng([sampler.seed, index])
    scene = sampler.scene
    detections = []
    clouds = []
    for label in scene.labels():
        comps = [o for o in scene.objects if o.label == label]
        weights = np.array([o.weight for o in comps])
        weights = weights / weights.sum()
        for _ in range(sampler.instances_per_draw):
            missed = rng.random() < sampler.miss_rate
            obj = comps[rng.choice(len(comps), p=weights)]
            if missed or not obj.detectable:
                continue
            half = sampler.instance_extent / 2.0
            lo = obj.box_min + half
            hi = obj.box_max - half
            bad = lo > hi
            lo[bad] = (obj.box_min + obj.box_max)[bad] / 2.0
            hi[bad] = lo[bad]
            center = rng.uniform(lo, hi)
            conf = float(np.clip(1.0 - abs(rng.normal(0.0, sampler.detection_noise)), 0.0, 1.0))
            pts = _sample_box_surface(rng, center, np.full(3, sampler.instance_extent), sampler.points_per_instance)
            clouds.append(
                ConfidenceCloud(pts, np.full(len(pts), conf), np.full(len(pts), label, dtype=object))
            )
            corners = center + np.array(
                [[sx, sy, sz] for sx in (-half, half) for sy in (-half, half) for sz in (-half, half)]
            )
            pixels, depths, in_view = project_points(corners, cam)
            if np.any(in_view):
                vis = pixels[in_view]
                x0, y0 = vis.min(axis=0)
                x1, y1 = vis.max(axis=0)
                x1 = max(x1, x0 + 1e-6)
                y1 = max(y1, y0 + 1e-6)
                detections.append(
                    Detection(image_id=f"draw{index}", label=label, bbox=(x0, y0, x1, y1), confidence=conf)
                )
    return detections, concat_clouds(clouds)


def analytic_metrics(scene: SyntheticScene, label: str, predicted: SpatialDistribution, thr: Thresholds = Thresholds()) -> PairMetrics:
    """Score a prediction against the scene's exact distribution."""
    if label not in scene.analytic:
        raise ValueError(f"scene has no object labeled {label!r}")
    g = scene.analytic[label]
    if not g.same_domain(predicted):
        raise ValueError("prediction domain does not match the scene grid")
    return evaluate_pair(g, predicted, thr, scene="synthetic")


def softmax_matched_weights(n_cells: int, n_support: int, confidence: float = 1.0):
    """Mixture weights (ambient, focus) for which voxel-mean aggregation with a
    flat detection confidence reproduces the mixture after softmax.

    With every focus voxel observed at the given confidence and ambient mass
    spread over the full grid, softmax of the raw voxel grid equals the mixture
    exactly in the many-sample limit.
    """
    if not (0 < n_support < n_cells):
        raise ValueError("support must be a proper non-empty subset of the grid")
    boost = math.exp(confidence)
    z = n_support * boost + (n_cells - n_support)
    return n_cells / z, n_support * (boost - 1.0) / z
