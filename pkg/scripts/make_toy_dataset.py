#!/usr/bin/env python3
"""Regenerate the bundled toy dataset under data/toy/.

Small enough to keep in the repository, rich enough to exercise every CLI
path: two posed frames with detections and depth, a reconstruction cloud,
voxel-cloud samples, 2D detection samples, and VLM answer counts.
"""
import json
from pathlib import Path

import numpy as np

from ssdbench import CameraModel, ConfidenceCloud, Detection, RigidTransform
from ssdbench import io as sio

ROOT = Path(__file__).resolve().parents[1] / "data" / "toy"


def camera_at(position):
    pose = RigidTransform(np.eye(3), -np.asarray(position, dtype=float))
    return CameraModel(fx=40.0, fy=40.0, cx=32.0, cy=18.0, width=64, height=36, pose=pose)


def main():
    rng = np.random.default_rng(2024)
    for sub in ("cams", "det", "depth", "samples_dfm", "samples_sdxl", "vlm"):
        (ROOT / sub).mkdir(parents=True, exist_ok=True)

    sio.save_camera(camera_at((0.0, 0.0, 0.0)), ROOT / "cams" / "f0.json")
    sio.save_camera(camera_at((0.5, 0.0, 0.0)), ROOT / "cams" / "f1.json")

    sio.save_detections(
        [
            Detection("f0", "chair", (10.0, 10.0, 20.0, 20.0), 0.9),
            Detection("f0", "plant", (40.0, 12.0, 50.0, 22.0), 0.6),
        ],
        ROOT / "det" / "f0.jsonl",
    )
    sio.save_detections(
        [
            Detection("f1", "chair", (8.0, 10.0, 18.0, 20.0), 0.8),
            Detection("f1", "plant", (38.0, 12.0, 48.0, 22.0), 0.55),
        ],
        ROOT / "det" / "f1.jsonl",
    )

    depth = np.full((36, 64), 3.0)
    sio.save_depth(depth, ROOT / "depth" / "f0.bin")
    sio.save_depth(depth, ROOT / "depth" / "f1.bin")

    # sparse reconstruction cloud (chair and plant blobs in front of f0)
    chair_pts = rng.normal([-1.3, -0.3, 3.0], 0.15, size=(40, 3))
    plant_pts = rng.normal([1.0, -0.2, 3.0], 0.15, size=(40, 3))
    recon = ConfidenceCloud(
        np.vstack([chair_pts, plant_pts]),
        np.concatenate([np.full(40, 0.9), np.full(40, 0.6)]),
        np.array(["chair"] * 40 + ["plant"] * 40, dtype=object),
    )
    sio.save_cloud(recon, ROOT / "recon.txt")

    manifest = {
        "scene_id": "toy",
        "input_frame": "f0",
        "reconstruction": "recon.txt",
        "objects": ["chair", "plant"],
        "image_domain": {"height": 36, "width_center": 36, "left_margin": 14, "right_margin": 14},
        "frames": [
            {"image_id": "f0", "camera": "cams/f0.json", "detections": "det/f0.jsonl", "depth": "depth/f0.bin"},
            {"image_id": "f1", "camera": "cams/f1.json", "detections": "det/f1.jsonl", "depth": "depth/f1.bin"},
        ],
    }
    (ROOT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    # voxel-cloud samples (two samples, two poses each), in the input-camera frame
    for n in range(2):
        d = ROOT / "samples_dfm" / str(n)
        d.mkdir(parents=True, exist_ok=True)
        for k in (1, 2):
            pts = np.vstack(
                [
                    rng.normal([-1.3, -0.3, 3.0], 0.2, size=(15, 3)),
                    rng.normal([1.0, -0.2, 3.0], 0.2, size=(15, 3)),
                ]
            )
            conf = np.concatenate([rng.uniform(0.6, 0.95, 15), rng.uniform(0.4, 0.8, 15)])
            labels = np.array(["chair"] * 15 + ["plant"] * 15, dtype=object)
            sio.save_cloud(ConfidenceCloud(pts, conf, labels), d / f"pose{k}.cloud.txt")

    # 2D detection samples over the expanded 36x64 image
    for n in range(3):
        d = ROOT / "samples_sdxl" / str(n)
        d.mkdir(parents=True, exist_ok=True)
        jitter = rng.uniform(-2, 2, size=2)
        sio.save_detections(
            [
                Detection(f"s{n}", "chair", (10 + jitter[0], 10.0, 20 + jitter[0], 20.0), float(rng.uniform(0.7, 0.95))),
                Detection(f"s{n}", "plant", (40 + jitter[1], 12.0, 50 + jitter[1], 22.0), float(rng.uniform(0.5, 0.7))),
            ],
            d / "pose1.detections.jsonl",
        )

    for label, yes in (("chair", (5, 90, 10)), ("plant", (20, 70, 30))):
        (ROOT / "vlm" / f"{label}.counts.json").write_text(
            json.dumps(
                {
                    "left": {"yes": yes[0], "queries": 100},
                    "center": {"yes": yes[1], "queries": 100},
                    "right": {"yes": yes[2], "queries": 100},
                },
                indent=2,
            )
            + "\n"
        )
    print(f"toy dataset written to {ROOT}")


if __name__ == "__main__":
    main()
