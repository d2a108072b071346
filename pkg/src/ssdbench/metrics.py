"""Benchmark metrics: normalized entropy/cross-entropy, nearest-peak distance,
false-negative rate, and region-wise accuracy, plus report aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .grid import ImageDomain, SpatialDistribution, Thresholds, detection_label, threshold

LOG_FLOOR = 1e-12
DEFAULT_KERNEL_SIZES = (3, 5, 7, 10)


def _normalized_xent(weights: np.ndarray, probs: np.ndarray, n_cells: int) -> float:
    # shared evaluation path so that cross_entropy(g, g) == entropy(g) bitwise
    w = weights.ravel()
    p = probs.ravel()
    mask = w > 0
    terms = w[mask] * np.log(np.maximum(p[mask], LOG_FLOOR))
    return float(-terms.sum() / math.log(n_cells))


def entropy(d: SpatialDistribution) -> float:
    """Shannon entropy normalized by log |X|; uniform -> 1, delta -> 0."""
    return _normalized_xent(d.values, d.values, d.n_cells)


def cross_entropy(g: SpatialDistribution, d: SpatialDistribution) -> float:
    """Cross-entropy of d under g, normalized by log |X|.

    d is floored at 1e-12 inside the log so true zeros stay finite.
    """
    if not g.same_domain(d):
        raise ValueError("distributions must share the same domain")
    return _normalized_xent(g.values, d.values, g.n_cells)


def find_peaks(dist: SpatialDistribution, thr: Thresholds, kernel_sizes=DEFAULT_KERNEL_SIZES) -> np.ndarray:
    """Local maxima of the thresholded grid, unioned over Moore-window sizes.

    Cells at or below tau are zeroed first.  For each window size s a cell is a
    peak when its value equals the max over the centered s-window (zero padding
    at edges; even sizes span [-s//2, s//2 - 1]) and exceeds tau.  Plateaus
    yield all of their cells.  Returns integer cell coordinates, row-major.
    """
    tau = thr.tau(dist.n_cells)
    vals = np.where(dist.values > tau, dist.values, 0.0)
    peak_mask = np.zeros(vals.shape, dtype=bool)
    for size in kernel_sizes:
        local_max = ndimage.maximum_filter(vals, size=size, mode="constant", cval=0.0)
        peak_mask |= (vals == local_max) & (vals > tau)
    return np.argwhere(peak_mask)


def grid_diameter(shape) -> float:
    """Full-grid diagonal between extreme cell centers, in cell units."""
    return float(np.sqrt(sum((n - 1) ** 2 for n in shape)))


def nn_distance(g_peaks: np.ndarray, d_peaks: np.ndarray, domain) -> float:
    """Mean distance from ground-truth peaks to the nearest predicted peak,
    normalized by the grid diagonal.  Infinite when no peaks were predicted."""
    g_peaks = np.atleast_2d(np.asarray(g_peaks))
    if g_peaks.size == 0:
        raise ValueError("ground-truth peak set is empty; pair should be excluded")
    d_peaks = np.atleast_2d(np.asarray(d_peaks))
    if d_peaks.size == 0:
        return math.inf
    tree = cKDTree(d_peaks)
    dists, _ = tree.query(g_peaks)
    return float(np.mean(dists) / grid_diameter(domain.shape))


def region_accuracy(g: SpatialDistribution, d: SpatialDistribution, thr: Thresholds, domain: Optional[ImageDomain] = None) -> float:
    """Fraction of left/center/right subdomains whose detection labels agree."""
    if not g.same_domain(d):
        raise ValueError("distributions must share the same domain")
    domain = domain or g.domain
    if not isinstance(domain, ImageDomain):
        raise ValueError("region accuracy is defined on 2D image domains only")
    slices = domain.region_slices()
    if sum(sl.stop - sl.start for sl in slices) != domain.width_full:
        raise ValueError("regions must partition the image domain")
    g_mask = threshold(g, thr)
    d_mask = threshold(d, thr)
    agree = 0
    for sl in slices:
        y = bool(g_mask[:, sl].any())
        y_hat = bool(d_mask[:, sl].any())
        agree += int(y == y_hat)
    return agree / len(slices)


@dataclass
class PairMetrics:
    """Metric values for one (scene, object, task) evaluation pair."""

    scene: str = ""
    label: str = ""
    task: str = "2d"
    h_cross: float = 0.0
    h: float = 0.0
    delta: float = math.inf
    y: int = 0
    y_hat: int = 0
    region_acc: Optional[float] = None  # 2D task only


def evaluate_pair(
    g: SpatialDistribution,
    d: SpatialDistribution,
    thr: Thresholds,
    scene: str = "",
    kernel_sizes=DEFAULT_KERNEL_SIZES,
) -> PairMetrics:
    """Score a predicted distribution against one ground-truth realization."""
    if not g.same_domain(d):
        raise ValueError("distributions must share the same domain")
    g_peaks = find_peaks(g, thr, kernel_sizes)
    d_peaks = find_peaks(d, thr, kernel_sizes)
    if g_peaks.size:
        delta = nn_distance(g_peaks, d_peaks, g.domain)
    else:
        delta = math.nan  # undefined: ground truth thresholds to empty
    is_2d = isinstance(g.domain, ImageDomain)
    return PairMetrics(
        scene=scene,
        label=g.label or d.label,
        task=g.kind,
        h_cross=cross_entropy(g, d),
        h=entropy(d),
        delta=delta,
        y=detection_label(threshold(g, thr)),
        y_hat=detection_label(threshold(d, thr)),
        region_acc=region_accuracy(g, d, thr) if is_2d else None,
    )


def fnr(pairs) -> float:
    """False-negative rate over (scene, object) pairs: sum y(1-y_hat) / sum y."""
    pairs = list(pairs)
    positives = sum(p.y for p in pairs)
    if positives == 0:
        raise ValueError("FNR is undefined: no pair has a positive ground-truth label")
    misses = sum(p.y * (1 - p.y_hat) for p in pairs)
    return misses / positives


def total_variation(p: SpatialDistribution, q: SpatialDistribution) -> float:
    if not p.same_domain(q):
        raise ValueError("distributions must share the same domain")
    return 0.5 * float(np.abs(p.values - q.values).sum())


def _mean_std(values) -> Optional[dict]:
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return None
    return {"mean": float(arr.mean()), "std": float(arr.std())}


@dataclass
class MetricReport:
    """Dataset-level aggregates over evaluation pairs (mean +/- population std)."""

    n_pairs: int = 0
    h_cross: Optional[dict] = None
    h: Optional[dict] = None
    delta: Optional[dict] = None  # over finite entries only
    n_delta_inf: int = 0
    n_delta_undefined: int = 0
    fnr: Optional[float] = None
    region_acc: Optional[dict] = None
    pairs: list = field(default_factory=list)


def aggregate_report(pairs) -> MetricReport:
    """Fold pair metrics into a report.  The distance average excludes infinite
    entries; their count is recorded."""
    pairs = list(pairs)
    deltas = [p.delta for p in pairs if not math.isnan(p.delta)]
    finite = [v for v in deltas if math.isfinite(v)]
    positives = sum(p.y for p in pairs)
    accs = [p.region_acc for p in pairs if p.region_acc is not None]
    return MetricReport(
        n_pairs=len(pairs),
        h_cross=_mean_std(p.h_cross for p in pairs),
        h=_mean_std(p.h for p in pairs),
        delta=_mean_std(finite),
        n_delta_inf=len(deltas) - len(finite),
        n_delta_undefined=sum(math.isnan(p.delta) for p in pairs),
        fnr=fnr(pairs) if positives > 0 else None,
        region_acc=_mean_std(accs),
        pairs=pairs,
    )
