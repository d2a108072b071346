"""Command-line driver: build ground truth, aggregate samples, evaluate,
calibrate, and generate synthetic scenes."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import aggregate as agg
from . import baselines, calibrate, groundtruth, io, metrics, synth
from .geometry import CameraModel
from .grid import ImageDomain, Thresholds, VoxelDomain

DEFAULTS = {
    "lambda": 1.4,
    "tau_conf": 0.1,
    "grid_3d": [20, 20, 20],
    "grid_25d": [10, 10, 10],
    "cell_size": 1.0,
    "image_height": 360,
    "image_width_center": 360,
    "image_margin": 140,
    "max_depth": 10.0,
    "jobs": os.cpu_count() or 1,
}

CONFIG_ENV = "SSD_BENCH_CONFIG"


def _load_config(path):
    cfg = dict(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        with open(path) as f:
            cfg.update(json.load(f))
    return cfg


def _setting(args, cfg, attr, key):
    value = getattr(args, attr, None)
    return cfg[key] if value is None else value


def _thresholds(args, cfg) -> Thresholds:
    return Thresholds(
        lam=float(_setting(args, cfg, "lam", "lambda")),
        tau_conf=float(_setting(args, cfg, "tau_conf", "tau_conf")),
    )


def _image_domain(cfg, manifest=None) -> ImageDomain:
    if manifest is not None and manifest.image_domain is not None:
        return manifest.image_domain
    m = cfg["image_margin"]
    return ImageDomain(cfg["image_height"], cfg["image_width_center"], m, m)


def _voxel_domain(args, cfg, task) -> VoxelDomain:
    grid = getattr(args, "grid", None)
    cell = float(_setting(args, cfg, "cell_size", "cell_size"))
    if grid is not None:
        res = tuple(int(v) for v in grid.split(","))
    else:
        res = tuple(cfg["grid_3d"] if task == "3d" else cfg["grid_25d"])
    anchor = getattr(args, "anchor", None)
    if anchor is not None:
        return VoxelDomain(res, cell, tuple(float(v) for v in anchor.split(",")))
    if task == "2.5d":
        return VoxelDomain.default_25d(res, cell)
    return VoxelDomain.default_3d(res, cell)


def _parse_range(spec):
    start, stop, step = (float(v) for v in spec.split(":"))
    return list(np.arange(start, stop + step / 2.0, step))


def _dist_filename(scene, label, task):
    return f"{scene}__{label}__{task}.json"


# -- build-gt ----------------------------------------------------------------

def cmd_build_gt(args) -> int:
    cfg = _load_config(args.config)
    thr = _thresholds(args, cfg)
    manifest = io.load_manifest(args.manifest)
    frames = io.load_frames(manifest)
    by_id = {f.image_id: f for f in frames}
    input_frame = by_id[manifest.input_frame]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    excluded = []
    for label in sorted(manifest.objects):
        if args.task == "2d":
            domain = _image_domain(cfg, manifest)
            dist = groundtruth.gt_2d(input_frame, label, domain, thr)
        elif args.task == "3d":
            domain = _voxel_domain(args, cfg, "3d")
            dist = groundtruth.gt_3d(frames, label, domain, input_cam=input_frame.camera, thr=thr)
        else:
            domain = _voxel_domain(args, cfg, "2.5d")
            dist = groundtruth.gt_25d(
                frames, label, input_frame.camera, domain, thr,
                max_depth=float(_setting(args, cfg, "max_depth", "max_depth")),
            )
        if dist is None:
            excluded.append({"scene": manifest.scene_id, "label": label, "task": args.task})
        else:
            io.save_distribution(dist, out / _dist_filename(manifest.scene_id, label, args.task))
    (out / "exclusions.json").write_text(
        json.dumps({"generated_by": io.GENERATED_BY, "excluded": excluded}, indent=2) + "\n"
    )
    return 0


# -- aggregate ---------------------------------------------------------------

def _sample_dirs(samples_dir):
    dirs = [d for d in Path(samples_dir).iterdir() if d.is_dir()]
    return sorted(dirs, key=lambda d: (len(d.name), d.name))


def cmd_aggregate(args) -> int:
    cfg = _load_config(args.config)
    samples_dir = Path(args.samples)
    scene_id = args.scene_id or samples_dir.name
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.pipeline == "vlm":
        domain = _image_domain(cfg)
        counts_files = sorted(samples_dir.glob("*.counts.json"))
        if not counts_files:
            raise ValueError(f"no *.counts.json files under {samples_dir}")
        for path in counts_files:
            label = path.name[: -len(".counts.json")]
            dist = agg.vlm_region_distribution(io.load_region_counts(path), domain, label=label)
            io.save_distribution(dist, out / _dist_filename(scene_id, label, "2d"))
        return 0

    dirs = _sample_dirs(samples_dir)
    if not dirs:
        raise ValueError(f"no sample directories under {samples_dir}")

    if args.pipeline == "dfm3d":
        if args.task != "3d":
            raise ValueError("the dfm3d pipeline aggregates voxel clouds; use --task 3d")
        domain = _voxel_domain(args, cfg, args.task)
        clouds = []
        for d in dirs:
            for cloud_file in sorted(d.glob("pose*.cloud.txt")):
                clouds.append(io.load_cloud(cloud_file))
        labels = sorted({lab for c in clouds for lab in c.labels})
        if not labels:
            raise ValueError("sample clouds contain no points")
        for label in labels:
            dist = agg.aggregate_3d(clouds, domain, label=label)
            io.save_distribution(dist, out / _dist_filename(scene_id, label, args.task))
        return 0

    # sdxl2d: per-sample detection files over the expanded image
    domain = _image_domain(cfg)
    thr = _thresholds(args, cfg)
    per_sample = []
    labels = set()
    for d in dirs:
        dets = []
        for det_file in sorted(d.glob("pose*.detections.jsonl")):
            dets.extend(io.load_detections(det_file))
        per_sample.append(dets)
        labels.update(det.label for det in dets)
    if not labels:
        raise ValueError("sample detections are empty")
    for label in sorted(labels):
        maps = [
            groundtruth.detection_confidence_map(dets, label, domain.height, domain.width_full, thr.tau_conf)
            for dets in per_sample
        ]
        dist = agg.aggregate_2d(maps, domain, label=label)
        if args.task == "2.5d":
            if not (args.depth and args.camera):
                raise ValueError("2.5d aggregation needs --depth and --camera for the lift")
            depth = io.load_depth(args.depth)
            cam = io.load_camera(args.camera)
            vdomain = _voxel_domain(args, cfg, "2.5d")
            dist = agg.lift_2d_to_25d(dist, depth, cam, vdomain,
                                      far=float(_setting(args, cfg, "max_depth", "max_depth")))
        io.save_distribution(dist, out / _dist_filename(scene_id, label, args.task))
    return 0


# -- evaluate ----------------------------------------------------------------

def _gt_keys(gt_dir, task):
    keys = {}
    for path in sorted(Path(gt_dir).glob(f"*__{task}.json")):
        scene, label, _ = path.name[: -len(".json")].split("__")
        keys[(scene, label)] = path
    return keys


def cmd_evaluate(args) -> int:
    cfg = _load_config(args.config)
    thr = _thresholds(args, cfg)
    gt_keys = _gt_keys(args.gt, args.task)
    if not gt_keys:
        raise ValueError(f"no ground-truth files for task {args.task} under {args.gt}")

    if args.pred:
        pred_keys = _gt_keys(args.pred, args.task)
        missing = sorted(set(gt_keys) - set(pred_keys))
        if missing:
            for scene, label in missing:
                print(f"missing prediction for ({scene}, {label}, {args.task})", file=sys.stderr)
            return 2
        predictor = None
    else:
        pred_keys = None
        predictor = args.predictor

    oracle_lift = None
    if predictor == "oracle" and args.task == "2.5d" and args.oracle_gt2d:
        if not (args.depth and args.camera):
            raise ValueError("the lifted 2.5d oracle needs --depth and --camera")
        oracle_lift = {
            "gt2d": _gt_keys(args.oracle_gt2d, "2d"),
            "depth": io.load_depth(args.depth),
            "camera": io.load_camera(args.camera),
        }

    def evaluate_key(item):
        (scene, label), gt_path = item
        g = io.load_distribution(gt_path)
        if pred_keys is not None:
            d = io.load_distribution(pred_keys[(scene, label)])
        elif predictor == "uniform":
            d = baselines.uniform_baseline(g.domain, label=label, kind=g.kind)
        elif oracle_lift is not None and (scene, label) in oracle_lift["gt2d"]:
            g2d = io.load_distribution(oracle_lift["gt2d"][(scene, label)])
            d = baselines.oracle_25d(g2d, oracle_lift["depth"], oracle_lift["camera"], g.domain)
        else:
            d = baselines.oracle(g)
        return (scene, label), metrics.evaluate_pair(g, d, thr, scene=scene)

    items = sorted(gt_keys.items())
    jobs = int(_setting(args, cfg, "jobs", "jobs"))
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate_key, items))
    else:
        results = [evaluate_key(item) for item in items]

    out = Path(args.out)
    pairs_dir = out / "pairs"
    pairs_dir.mkdir(parents=True, exist_ok=True)
    pairs = []
    for (scene, label), pair in results:
        pairs.append(pair)
        (pairs_dir / f"{scene}__{label}__{args.task}.metrics.json").write_text(
            json.dumps(io.pair_to_dict(pair), indent=2) + "\n"
        )
    report = metrics.aggregate_report(pairs)
    io.save_report_json(report, out / "report.json", task=args.task)
    io.save_report_csv(report, out / "report.csv", task=args.task)
    return 0


# -- calibrate ---------------------------------------------------------------

def cmd_calibrate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.mode == "retention":
        dists = [io.load_distribution(p) for p in sorted(Path(args.dists).glob("*__*.json"))]
        curve = calibrate.retention_curve(dists, _parse_range(args.lambdas))
        lines = ["lambda,retention_pct"]
        lines += [f"{lam:.6g},{r:.6f}" for lam, r in zip(curve.lambdas, curve.retention)]
        (out / "retention.csv").write_text("\n".join(lines) + "\n")
        try:
            chosen = calibrate.knee(curve)
            knee_obj = {"generated_by": io.GENERATED_BY, "knee_lambda": chosen}
        except calibrate.NoKneeError as e:
            knee_obj = {"generated_by": io.GENERATED_BY, "knee_lambda": None, "error": str(e)}
        (out / "knee.json").write_text(json.dumps(knee_obj, indent=2) + "\n")
        return 0
    # detector-confidence bbox-rate curve
    manifest = io.load_manifest(args.manifest)
    frames = io.load_frames(manifest)
    rows = calibrate.bbox_rate_curve(frames, _parse_range(args.thresholds))
    lines = ["threshold,boxes_per_frame_mean,boxes_per_frame_std"]
    lines += [f"{t:.6g},{m:.6f},{s:.6f}" for t, m, s in rows]
    (out / "bbox_rate.csv").write_text("\n".join(lines) + "\n")
    return 0


# -- synth -------------------------------------------------------------------

def _camera_from_dict(obj) -> CameraModel:
    from .geometry import RigidTransform
    pose = RigidTransform(np.asarray(obj["R"], dtype=float).reshape(3, 3), np.asarray(obj["t"], dtype=float))
    return CameraModel(obj["fx"], obj["fy"], obj["cx"], obj["cy"], int(obj["width"]), int(obj["height"]), pose)


def cmd_synth(args) -> int:
    spec = io._load_json(args.scene)
    domain = VoxelDomain(
        tuple(spec["domain"]["resolution"]),
        spec["domain"].get("cell_size", 1.0),
        tuple(spec["domain"]["camera_anchor"]),
    )
    objects = [
        synth.SceneObject(
            label=o["label"], center=tuple(o["center"]), extent=tuple(o["extent"]),
            weight=o.get("weight", 1.0), detectable=o.get("detectable", True),
        )
        for o in spec["objects"]
    ]
    scene = synth.make_scene(spec["room"]["min"], spec["room"]["max"], objects, domain)
    scene_id = spec.get("scene_id", "synthetic")
    if "camera" in spec:
        cam = _camera_from_dict(spec["camera"])
    else:
        cam = CameraModel(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=100, height=100)
    sampler = synth.SimulatedSampler(
        scene=scene,
        detection_noise=args.noise,
        miss_rate=args.miss_rate,
        instances_per_draw=args.instances,
        points_per_instance=args.points_per_instance,
        seed=args.seed,
    )
    out = Path(args.out)
    gt_dir = out / "gt"
    gt_dir.mkdir(parents=True, exist_ok=True)
    for label in scene.labels():
        io.save_distribution(scene.analytic[label], gt_dir / _dist_filename(scene_id, label, "3d"))
    for n in range(args.samples):
        sample_dir = out / "samples" / str(n)
        sample_dir.mkdir(parents=True, exist_ok=True)
        detections, cloud = synth.draw_sample(sampler, cam, index=n)
        io.save_detections(detections, sample_dir / "pose1.detections.jsonl")
        io.save_cloud(cloud, sample_dir / "pose1.cloud.txt")
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssdbench", description=__doc__)
    parser.add_argument("--config", help=f"JSON config file (or set ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, tasks=("2d", "2.5d", "3d")):
        p.add_argument("--task", choices=tasks, required=True)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--tau-conf", dest="tau_conf", type=float, default=None)
        p.add_argument("--grid", default=None, help="nx,ny,nz voxel resolution")
        p.add_argument("--cell-size", dest="cell_size", type=float, default=None)
        p.add_argument("--anchor", default=None, help="ax,ay,az camera anchor in grid cells")

    p = sub.add_parser("build-gt", help="construct ground-truth distributions from a scene manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_build_gt)

    p = sub.add_parser("aggregate", help="aggregate generative samples into predicted distributions")
    p.add_argument("--samples", required=True)
    p.add_argument("--pipeline", choices=("dfm3d", "sdxl2d", "vlm"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scene-id", default=None)
    p.add_argument("--depth", default=None, help="depth map for the 2.5d lift")
    p.add_argument("--camera", default=None, help="camera for the 2.5d lift")
    add_common(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--gt", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pred", default=None)
    group.add_argument("--predictor", choices=("uniform", "oracle"), default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--oracle-gt2d", default=None, help="2d ground truth to lift for the 2.5d oracle")
    p.add_argument("--depth", default=None)
    p.add_argument("--camera", default=None)
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="hyperparameter calibration curves")
    mode = p.add_subparsers(dest="mode", required=True)
    pr = mode.add_parser("retention", help="threshold-multiplier retention curve and knee")
    pr.add_argument("--dists", required=True, help="directory of distribution JSON files")
    pr.add_argument("--lambdas", default="1.0:3.0:0.05", help="start:stop:step")
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_calibrate, mode="retention")
    pc = mode.add_parser("conf", help="detector-confidence bbox-rate curve")
    pc.add_argument("--manifest", required=True)
    pc.add_argument("--thresholds", default="0.0:1.0:0.05", help="start:stop:step")
    pc.add_argument("--out", required=True)
    pc.set_defaults(func=cmd_calibrate, mode="conf")

    p = sub.add_parser("synth", help="generate a synthetic scene's ground truth and samples")
    p.add_argument("--scene", required=True, help="scene spec JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--miss-rate", dest="miss_rate", type=float, default=0.0)
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--points-per-instance", dest="points_per_instance", type=int, default=32)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
