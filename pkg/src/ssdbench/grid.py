"""Discrete spatial domains, normalized probability grids, and thresholding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax as _softmax

PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ImageDomain:
    """Expanded 2D pixel grid: a center crop widened symmetrically by margins."""

    height: int = 360
    width_center: int = 360
    left_margin: int = 140
    right_margin: int = 140

    def __post_init__(self):
        if self.height <= 0 or self.width_center <= 0:
            raise ValueError("image domain extents must be positive")
        if self.left_margin < 0 or self.right_margin < 0:
            raise ValueError("margins must be non-negative")
        if self.width_full <= self.width_center:
            raise ValueError("expanded width must exceed the center width")

    @property
    def width_full(self) -> int:
        return self.width_center + self.left_margin + self.right_margin

    @property
    def shape(self) -> tuple:
        return (self.height, self.width_full)

    @property
    def n_cells(self) -> int:
        return self.height * self.width_full

    def region_slices(self):
        """Column slices of the left / center / right subdomains."""
        lm = self.left_margin
        wc = self.width_center
        return [slice(0, lm), slice(lm, lm + wc), slice(lm + wc, self.width_full)]


@dataclass(frozen=True)
class VoxelDomain:
    """Camera-anchored 3D voxel grid.

    The camera sits at continuous grid coordinate ``camera_anchor`` (in cells)
    and looks along +z.  A camera-frame point p maps to the voxel
    floor(p / cell_size + camera_anchor).
    """

    resolution: tuple = (20, 20, 20)
    cell_size: float = 1.0
    camera_anchor: tuple = (10.0, 10.0, 10.0)

    def __post_init__(self):
        if len(self.resolution) != 3 or any(n <= 0 for n in self.resolution):
            raise ValueError("resolution must be three positive counts")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")

    @classmethod
    def default_3d(cls, resolution=(20, 20, 20), cell_size=1.0):
        anchor = tuple(n / 2.0 for n in resolution)
        return cls(tuple(resolution), cell_size, anchor)

    @classmethod
    def default_25d(cls, resolution=(10, 10, 10), cell_size=1.0):
        # camera pushed 5 cells back from the grid center along the viewing axis
        nx, ny, nz = resolution
        anchor = (nx / 2.0, ny / 2.0, nz / 2.0 - 5.0)
        return cls(tuple(resolution), cell_size, anchor)

    @property
    def shape(self) -> tuple:
        return tuple(self.resolution)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.resolution))

    def point_to_index(self, points: np.ndarray):
        """Map camera-frame points (N, 3) to voxel indices and an in-bounds mask."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        grid = pts / self.cell_size + np.asarray(self.camera_anchor, dtype=float)
        idx = np.floor(grid).astype(np.int64)
        res = np.asarray(self.resolution)
        inside = np.all((idx >= 0) & (idx < res), axis=1)
        return idx, inside

    def cell_bounds(self, axis: int):
        """Lower and upper world coordinates of every cell along one axis."""
        n = self.resolution[axis]
        lo = (np.arange(n) - self.camera_anchor[axis]) * self.cell_size
        return lo, lo + self.cell_size


@dataclass
class SpatialDistribution:
    """A normalized probability grid over an ImageDomain or VoxelDomain."""

    domain: object
    values: np.ndarray
    label: str = ""
    kind: str = "2d"  # one of "2d", "2.5d", "3d"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match domain {self.domain.shape}"
            )
        if np.any(self.values < 0):
            raise ValueError("probabilities must be non-negative")
        total = float(self.values.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        if self.kind not in ("2d", "2.5d", "3d"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def n_cells(self) -> int:
        return self.domain.n_cells

    def same_domain(self, other: "SpatialDistribution") -> bool:
        return self.domain == other.domain


@dataclass(frozen=True)
class Thresholds:
    """Detection thresholds: tau = lam / |X| plus the detector confidence floor."""

    lam: float = 1.4
    tau_conf: float = 0.1

    def __post_init__(self):
        if self.lam <= 1.0:
            raise ValueError("threshold multiplier must exceed 1")

    def tau(self, n_cells: int) -> float:
        return self.lam / n_cells


def softmax_normalize(raw: np.ndarray, domain, label: str = "", kind: str = "2d") -> SpatialDistribution:
    """Softmax a raw confidence grid into a SpatialDistribution.

    Computed with max-subtraction for stability; an all-zero grid becomes
    uniform.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise ValueError("cannot normalize an empty grid")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw confidences must be finite")
    values = _softmax(raw.ravel()).reshape(raw.shape)
    return SpatialDistribution(domain=domain, values=values, label=label, kind=kind)


def threshold(dist: SpatialDistribution, thr: Thresholds) -> np.ndarray:
    """Boolean mask of cells strictly above tau = lam / |X|."""
    return dist.values > thr.tau(dist.n_cells)


def detection_label(thresholded: np.ndarray) -> int:
    """1 if any cell survived thresholding, else 0."""
    return int(np.any(thresholded))


def voxelize_nonzero_mean(points: np.ndarray, confidences: np.ndarray, domain: VoxelDomain) -> np.ndarray:
    """Average the non-zero confidences of the points landing in each voxel.

    Points outside the domain are dropped; voxels with no positive-confidence
    points get 0.
    """
    raw = np.zeros(domain.shape, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    conf = np.asarray(confidences, dtype=float).ravel()
    if pts.shape[0] == 0:
        return raw
    idx, inside = domain.point_to_index(pts)
    keep = inside & (conf > 0)
    if not np.any(keep):
        return raw
    idx = idx[keep]
    conf = conf[keep]
    sums = np.zeros(domain.shape, dtype=float)
    counts = np.zeros(domain.shape, dtype=np.int64)
    np.add.at(sums, (idx[:, 0], idx[:, 1], idx[:, 2]), conf)
    np.add.at(counts, (idx[:, 0], idx[:, 1], idx[:, 2]), 1)
    occupied = counts > 0
    raw[occupied] = sums[occupied] / counts[occupied]
    return raw
