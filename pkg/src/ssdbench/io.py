"""File formats: cameras, clouds, depth maps, detections, distributions,
scene manifests, and reports."""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregate import RegionCounts
from .geometry import CameraModel, ConfidenceCloud, RigidTransform
from .grid import ImageDomain, SpatialDistribution, VoxelDomain
from .groundtruth import Detection, PosedFrame
from .metrics import MetricReport, PairMetrics

GENERATED_BY = "ssdbench 0.1.0"


def _load_json(path):
    path = Path(path)
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: malformed JSON at line {e.lineno}: {e.msg}") from e


# -- cameras -----------------------------------------------------------------

def load_camera(path) -> CameraModel:
    obj = _load_json(path)
    pose = RigidTransform(np.asarray(obj["R"], dtype=float).reshape(3, 3), np.asarray(obj["t"], dtype=float))
    return CameraModel(
        fx=obj["fx"], fy=obj["fy"], cx=obj["cx"], cy=obj["cy"],
        width=int(obj["width"]), height=int(obj["height"]), pose=pose,
    )


def save_camera(cam: CameraModel, path) -> None:
    obj = {
        "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
        "width": cam.width, "height": cam.height,
        "R": [float(v) for v in cam.pose.rotation.ravel()],
        "t": [float(v) for v in cam.pose.translation],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# -- point clouds ------------------------------------------------------------

def load_cloud(path) -> ConfidenceCloud:
    """ASCII records: `x y z confidence label`, one point per line."""
    points, confs, labels = [], [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            points.append([float(parts[0]), float(parts[1]), float(parts[2])])
            confs.append(float(parts[3]))
            labels.append(parts[4])
    if not points:
        return ConfidenceCloud.empty()
    return ConfidenceCloud(np.asarray(points), np.asarray(confs), np.asarray(labels, dtype=object))


def save_cloud(cloud: ConfidenceCloud, path) -> None:
    with open(path, "w") as f:
        for p, c, lab in zip(cloud.points, cloud.confidences, cloud.labels):
            f.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g} {c:.17g} {lab}\n")


# -- depth maps --------------------------------------------------------------

def load_depth(path) -> np.ndarray:
    """Binary depth map: uint32 height, uint32 width, then row-major little-endian float64."""
    data = Path(path).read_bytes()
    h, w = struct.unpack("<II", data[:8])
    depth = np.frombuffer(data[8:], dtype="<f8", count=h * w)
    return depth.reshape(h, w).copy()


def save_depth(depth: np.ndarray, path) -> None:
    depth = np.asarray(depth, dtype="<f8")
    h, w = depth.shape
    Path(path).write_bytes(struct.pack("<II", h, w) + depth.tobytes())


# -- detections --------------------------------------------------------------

def load_detections(path) -> list:
    """JSON-lines, one detection per line."""
    path = Path(path)
    dets = []
    with open(path) as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: malformed JSON at line {i}: {e.msg}") from e
            dets.append(
                Detection(
                    image_id=obj["image_id"], label=obj["label"],
                    bbox=tuple(obj["bbox"]), confidence=obj["confidence"],
                )
            )
    return dets


def save_detections(detections, path) -> None:
    with open(path, "w") as f:
        for det in detections:
            f.write(json.dumps({
                "image_id": det.image_id, "label": det.label,
                "bbox": [float(v) for v in det.bbox], "confidence": float(det.confidence),
            }) + "\n")


# -- distributions -----------------------------------------------------------

def _domain_to_dict(domain):
    if isinstance(domain, ImageDomain):
        return {
            "type": "image", "height": domain.height, "width_center": domain.width_center,
            "left_margin": domain.left_margin, "right_margin": domain.right_margin,
        }
    if isinstance(domain, VoxelDomain):
        return {
            "type": "voxel", "resolution": list(domain.resolution),
            "cell_size": domain.cell_size, "camera_anchor": list(domain.camera_anchor),
        }
    raise TypeError(f"unknown domain type {type(domain)!r}")


def _domain_from_dict(obj):
    if obj["type"] == "image":
        return ImageDomain(obj["height"], obj["width_center"], obj["left_margin"], obj["right_margin"])
    if obj["type"] == "voxel":
        return VoxelDomain(tuple(obj["resolution"]), obj["cell_size"], tuple(obj["camera_anchor"]))
    raise ValueError(f"unknown domain type {obj['type']!r}")


def load_distribution(path) -> SpatialDistribution:
    obj = _load_json(path)
    domain = _domain_from_dict(obj["domain"])
    values = np.asarray(obj["values"], dtype=float).reshape(domain.shape)
    return SpatialDistribution(domain=domain, values=values, label=obj["label"], kind=obj["kind"])


def save_distribution(dist: SpatialDistribution, path) -> None:
    obj = {
        "kind": dist.kind,
        "domain": _domain_to_dict(dist.domain),
        "label": dist.label,
        "values": [float(v) for v in dist.values.ravel()],
    }
    Path(path).write_text(json.dumps(obj) + "\n")


# -- VLM answer counts -------------------------------------------------------

def load_region_counts(path) -> RegionCounts:
    obj = _load_json(path)
    return RegionCounts(
        yes=tuple(obj[r]["yes"] for r in ("left", "center", "right")),
        queries=tuple(obj[r]["queries"] for r in ("left", "center", "right")),
    )


# -- scene manifests ---------------------------------------------------------

@dataclass
class FrameEntry:
    image_id: str
    camera_path: Path
    detections_path: Path
    depth_path: Path = None


@dataclass
class SceneManifest:
    scene_id: str
    frames: list
    input_frame: str
    reconstruction_path: Path = None
    objects: list = field(default_factory=list)
    image_domain: ImageDomain = None

    def frame_ids(self):
        return [f.image_id for f in self.frames]


def load_manifest(path) -> SceneManifest:
    path = Path(path)
    obj = _load_json(path)
    base = path.parent
    frames = []
    for fr in obj["frames"]:
        entry = FrameEntry(
            image_id=fr["image_id"],
            camera_path=base / fr["camera"],
            detections_path=base / fr["detections"],
            depth_path=(base / fr["depth"]) if fr.get("depth") else None,
        )
        frames.append(entry)
    domain = None
    if "image_domain" in obj:
        d = obj["image_domain"]
        domain = ImageDomain(d["height"], d["width_center"], d["left_margin"], d["right_margin"])
    manifest = SceneManifest(
        scene_id=obj["scene_id"],
        frames=frames,
        input_frame=obj["input_frame"],
        reconstruction_path=(base / obj["reconstruction"]) if obj.get("reconstruction") else None,
        objects=list(obj.get("objects", [])),
        image_domain=domain,
    )
    if manifest.input_frame not in manifest.frame_ids():
        raise ValueError(f"{path}: input_frame {manifest.input_frame!r} not among frames")
    for fr in frames:
        for p in (fr.camera_path, fr.detections_path, fr.depth_path):
            if p is not None and not p.exists():
                raise FileNotFoundError(f"manifest references missing file: {p}")
    if manifest.reconstruction_path is not None and not manifest.reconstruction_path.exists():
        raise FileNotFoundError(f"manifest references missing file: {manifest.reconstruction_path}")
    return manifest


def load_frames(manifest: SceneManifest) -> list:
    frames = []
    for entry in manifest.frames:
        cam = load_camera(entry.camera_path)
        dets = load_detections(entry.detections_path)
        depth = load_depth(entry.depth_path) if entry.depth_path else None
        frames.append(PosedFrame(image_id=entry.image_id, camera=cam, detections=dets, depth=depth))
    return frames


# -- reports -----------------------------------------------------------------

def _num(value):
    if value is None:
        return None
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return value


def pair_to_dict(p: PairMetrics) -> dict:
    return {
        "scene": p.scene, "label": p.label, "task": p.task,
        "h_cross": p.h_cross, "h": p.h, "delta": _num(p.delta),
        "y": p.y, "y_hat": p.y_hat, "region_accuracy": p.region_acc,
    }


def report_to_dict(report: MetricReport, task: str = "") -> dict:
    return {
        "generated_by": GENERATED_BY,
        "task": task,
        "n_pairs": report.n_pairs,
        "metrics": {
            "h_cross": report.h_cross,
            "h": report.h,
            "delta": None if report.delta is None else {
                **report.delta,
                "n_inf_excluded": report.n_delta_inf,
                "n_undefined": report.n_delta_undefined,
            },
            "fnr": report.fnr,
            "region_accuracy": report.region_acc,
        },
        "pairs": [pair_to_dict(p) for p in report.pairs],
    }


def save_report_json(report: MetricReport, path, task: str = "") -> None:
    Path(path).write_text(json.dumps(report_to_dict(report, task), indent=2) + "\n")


def save_report_csv(report: MetricReport, path, task: str = "") -> None:
    """Aligned-column CSV with the benchmark table layout; the peak-distance
    column is reported as a percentage."""
    def fmt(stats, scale=1.0):
        if stats is None:
            return "-", "-"
        return f"{scale * stats['mean']:.3f}", f"{scale * stats['std']:.3f}"

    hx_m, hx_s = fmt(report.h_cross)
    h_m, h_s = fmt(report.h)
    d_m, d_s = fmt(report.delta, scale=100.0)
    a_m, a_s = fmt(report.region_acc)
    fnr_v = "-" if report.fnr is None else f"{report.fnr:.3f}"
    header = ["task", "Hx_mean", "Hx_std", "H_mean", "H_std", "Delta_pct_mean",
              "Delta_pct_std", "FNR", "Acc_mean", "Acc_std", "n_pairs", "n_delta_inf_excluded"]
    row = [task, hx_m, hx_s, h_m, h_s, d_m, d_s, fnr_v, a_m, a_s,
           str(report.n_pairs), str(report.n_delta_inf)]
    widths = [max(len(h), len(v)) for h, v in zip(header, row)]
    lines = [
        ",".join(h.ljust(w) for h, w in zip(header, widths)),
        ",".join(v.ljust(w) for v, w in zip(row, widths)),
    ]
    Path(path).write_text("\n".join(lines) + "\n")
