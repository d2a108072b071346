#!/usr/bin/env python3
"""Synthetic scene with an analytically known distribution: draw simulated
samples, aggregate them, and watch the metrics converge to the closed form."""
import numpy as np

from ssdbench import (
    CameraModel,
    RigidTransform,
    SceneObject,
    SimulatedSampler,
    VoxelDomain,
    aggregate_3d,
    analytic_metrics,
    draw_sample,
    make_scene,
    softmax_matched_weights,
    total_variation,
)

dom = VoxelDomain((10, 10, 10), 1.0, (5.0, 5.0, 0.0))

# Mixture: a diffuse room-wide component the detector never sees, plus a
# compact 3x3x3 focus box.  The weights are chosen so that voxel-mean
# aggregation followed by softmax reproduces the mixture exactly in the
# many-sample limit (the diffuse share absorbs the softmax floor).
w_ambient, w_focus = softmax_matched_weights(dom.n_cells, 27, confidence=1.0)
print(f"mixture weights: ambient {w_ambient:.4f}, focus {w_focus:.4f}")

scene = make_scene(
    (-5.0, -5.0, 0.0),
    (5.0, 5.0, 10.0),
    [
        SceneObject("box", (0.0, 0.0, 5.0), (10.0, 10.0, 10.0),
                    weight=w_ambient, detectable=False),
        SceneObject("box", (0.5, 0.5, 5.5), (3.0, 3.0, 3.0), weight=w_focus),
    ],
    dom,
)

cam = CameraModel(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=100, height=100,
                  pose=RigidTransform.identity())
sampler = SimulatedSampler(scene, instances_per_draw=10, seed=17)

print(f"\n{'draws':>6} {'TV':>8} {'Hx':>7} {'H':>7} {'Delta%':>7}")
clouds = []
for n_draws in (10, 50, 200):
    while len(clouds) < n_draws:
        clouds.append(draw_sample(sampler, cam, index=len(clouds))[1])
    pred = aggregate_3d(clouds, dom, label="box")
    pair = analytic_metrics(scene, "box", pred)
    tv = total_variation(scene.analytic["box"], pred)
    print(f"{n_draws:>6} {tv:>8.4f} {pair.h_cross:>7.4f} {pair.h:>7.4f} {100 * pair.delta:>7.2f}")

g = scene.analytic["box"]
print(f"\nanalytic floor: H = {analytic_metrics(scene, 'box', g).h:.4f}, "
      f"Delta = 0, TV = 0")
print("the sampler is deterministic per (seed, index); rerunning reproduces "
      "these numbers bit-for-bit")
