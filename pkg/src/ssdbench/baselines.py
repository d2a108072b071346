"""Uniform and oracle reference predictors."""
from __future__ import annotations

import numpy as np

from .aggregate import lift_2d_to_25d
from .grid import SpatialDistribution, VoxelDomain


def uniform_baseline(domain, label: str = "", kind: str = "2d") -> SpatialDistribution:
    """Equal probability on every cell."""
    values = np.full(domain.shape, 1.0 / domain.n_cells)
    return SpatialDistribution(domain=domain, values=values, label=label, kind=kind)


def oracle(g: SpatialDistribution) -> SpatialDistribution:
    """Predictor with access to the ground truth: returns it unchanged."""
    return g


def oracle_25d(g2d: SpatialDistribution, depth: np.ndarray, cam, domain: VoxelDomain) -> SpatialDistribution:
    """2.5D oracle: the 2D ground truth unprojected with the input depth map.

    Deliberately imperfect relative to the 2.5D ground truth, which went
    through culling and voxel pooling.
    """
    return lift_2d_to_25d(g2d, depth, cam, domain)
