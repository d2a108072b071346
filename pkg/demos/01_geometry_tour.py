#!/usr/bin/env python3
"""Tour of the camera geometry utilities: projection, back-projection, and the
culling/filtering steps that turn multi-view points into a clean cloud."""
import numpy as np

from ssdbench import (
    CameraModel,
    ConfidenceCloud,
    RigidTransform,
    back_project,
    clip_depth,
    frustum_cull,
    outlier_filter,
    project,
    z_cull,
)

cam = CameraModel(fx=100.0, fy=100.0, cx=180.0, cy=180.0, width=360, height=360,
                  pose=RigidTransform.identity())

# A camera-frame point projects through the pinhole model; +z is forward,
# +x right, +y down, pixel origin at the top-left corner.
point = np.array([1.0, -0.5, 4.0])
pixel, depth = project(point, cam)
print(f"point {point} -> pixel ({pixel[0]:.1f}, {pixel[1]:.1f}) at depth {depth:.1f}")

# Back-projection inverts it given the depth.
recovered = back_project(pixel, depth, cam)
print(f"back-projected: {np.round(recovered, 6)}")

# Build a noisy cloud around two blobs plus one gross outlier.
rng = np.random.default_rng(0)
pts = np.vstack([
    rng.normal([0.0, 0.0, 3.0], 0.2, size=(80, 3)),
    rng.normal([1.5, 0.0, 6.0], 0.2, size=(80, 3)),
    [[40.0, 0.0, 5.0]],          # lone outlier
    [[0.0, 0.0, -2.0]],          # behind the camera
    [[0.0, 0.0, 25.0]],          # far beyond the depth clip
])
cloud = ConfidenceCloud(pts, np.full(len(pts), 0.8), np.full(len(pts), "chair", dtype=object))
print(f"\nraw cloud: {len(cloud)} points")

# Frustum culling keeps only points the camera can see.
visible = frustum_cull(cloud, cam, near=1e-3)
print(f"after frustum cull: {len(visible)}")

# Z-culling keeps the nearest point per pixel, shadowing the far blob where
# the two overlap in image space.
surface = z_cull(visible, cam)
print(f"after z-cull:       {len(surface)}")

# Depth clipping drops everything past 10 units.
near_field = clip_depth(surface, cam, max_depth=10.0)
print(f"after depth clip:   {len(near_field)}")

# The statistical outlier filter removes points whose mean 20-NN distance is
# more than two standard deviations above the cloud average.
clean = outlier_filter(near_field, k=20)
print(f"after outlier pass: {len(clean)}")
print(f"max |x| remaining:  {np.abs(clean.points[:, 0]).max():.2f} (outlier at 40.0 removed)")
