"""Per-point visual distinctiveness scores in [0, 1].

Higher means "easier to match". All functions return a read-only float64
vector aligned with ``scene.points``.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .config import ScoreConfig
from .scene import SceneModel

log = logging.getLogger(__name__)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def default_beta(scene: SceneModel) -> float:
    """Mean of all pair distances in the scene, or 1.0 if that is zero/undefined."""
    total = 0.0
    count = 0
    for p in scene.points:
        total += math.fsum(p.pair_distances)
        count += len(p.pair_distances)
    if count == 0 or total <= 0:
        return 1.0
    return total / count


def mean_pair_distances(scene: SceneModel) -> np.ndarray:
    """Mean descriptor distance per point; NaN where the point has no pairs."""
    out = np.full(len(scene), np.nan)
    for k, p in enumerate(scene.points):
        if p.pair_distances:
            out[k] = math.fsum(p.pair_distances) / len(p.pair_distances)
    return out


def score_avg_distance(scene: SceneModel, beta: float | None = None) -> np.ndarray:
    """``exp(-mean_distance / beta)``; points without correspondences score 0."""
    if beta is None:
        beta = default_beta(scene)
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    mean = mean_pair_distances(scene)
    empty = np.isnan(mean)
    if empty.any():
        log.warning("%d point(s) have no descriptor pairs; scoring them 0", int(empty.sum()))
    scores = np.zeros(len(scene))
    scores[~empty] = np.exp(-mean[~empty] / beta)
    return _frozen(scores)


def score_camera_fraction(scene: SceneModel) -> np.ndarray:
    return _frozen(scene.cameras_seen / float(scene.total_cameras))


def score_camera_max_fraction(scene: SceneModel) -> np.ndarray:
    cams = scene.cameras_seen
    return _frozen(cams / float(cams.max()))


def score_combination(scene: SceneModel, beta: float | None = None, weight: float = 0.5) -> np.ndarray:
    """Convex combination ``w * avg_distance + (1 - w) * camera_max_fraction``."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    d = score_avg_distance(scene, beta)
    f = score_camera_max_fraction(scene)
    # endpoints return the component vector itself so the identities are exact
    if weight == 1.0:
        return d
    if weight == 0.0:
        return f
    return _frozen(weight * d + (1.0 - weight) * f)


def compute_scores(scene: SceneModel, config: ScoreConfig) -> np.ndarray:
    if config.kind == "avg_distance":
        return score_avg_distance(scene, config.beta)
    if config.kind == "camera_fraction":
        return score_camera_fraction(scene)
    if config.kind == "camera_max_fraction":
        return score_camera_max_fraction(scene)
    if config.kind == "combination":
        return score_combination(scene, config.beta, config.weight)
    raise ValueError(f"unknown score kind {config.kind!r}")
