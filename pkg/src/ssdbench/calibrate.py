"""Hyperparameter calibration: threshold-multiplier knee and detector
confidence curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NoKneeError(ValueError):
    """The retention curve has no slope break to pick a multiplier from."""


@dataclass
class RetentionCurve:
    """Percent of cells above tau = lam / |X|, averaged over a grid corpus."""

    lambdas: np.ndarray
    retention: np.ndarray

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.retention = np.asarray(self.retention, dtype=float)
        if self.lambdas.shape != self.retention.shape:
            raise ValueError("lambdas and retention must align")


def retention_curve(grids, lambdas) -> RetentionCurve:
    """Average the fraction of cells surviving the threshold, per multiplier."""
    grids = list(grids)
    if not grids:
        raise ValueError("empty grid corpus")
    lambdas = np.asarray(sorted(lambdas), dtype=float)
    rates = np.zeros_like(lambdas)
    for dist in grids:
        vals = dist.values.ravel()
        n = vals.size
        rates += np.array([(vals > lam / n).mean() for lam in lambdas])
    return RetentionCurve(lambdas, 100.0 * rates / len(grids))


def knee(curve: RetentionCurve) -> float:
    """Multiplier at the curve's breaking point: the maximum discrete second
    difference of retention.  Ties break toward the smaller multiplier."""
    r = curve.retention
    if r.size < 3:
        raise ValueError("need at least three curve points")
    d2 = r[2:] - 2.0 * r[1:-1] + r[:-2]
    scale = max(1.0, float(np.abs(r).max()))
    if d2.max() <= 1e-9 * scale:
        raise NoKneeError("retention curve has no slope break")
    return float(curve.lambdas[1 + int(np.argmax(d2))])


def bbox_rate_curve(frames, conf_thresholds):
    """Mean and std of per-frame detection counts kept at each confidence
    threshold.  Returns a list of (threshold, mean, std)."""
    frames = list(frames)
    if not frames:
        raise ValueError("empty frame list")
    out = []
    for thr in conf_thresholds:
        counts = np.array(
            [sum(det.confidence >= thr for det in f.detections) for f in frames],
            dtype=float,
        )
        out.append((float(thr), float(counts.mean()), float(counts.std())))
    return out
