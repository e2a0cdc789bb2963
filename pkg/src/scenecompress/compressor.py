"""End-to-end compression: score, solve, keep the support points."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .config import CompressionParams
from .distinctiveness import compute_scores, default_beta
from .objective import ObjectiveBreakdown, evaluate
from .scene import SceneModel
from .solver import AlphaDistribution, SolverState, initialize, run

log = logging.getLogger(__name__)

# default support threshold, relative to the box cap
RELATIVE_THRESHOLD = 1e-8


def resolve_params(scene: SceneModel, params: CompressionParams) -> CompressionParams:
    """Fill in the scene-dependent defaults (beta, support threshold) explicitly."""
    if params.score.beta is None and params.score.kind in ("avg_distance", "combination"):
        params = params.with_beta(default_beta(scene))
    if params.support_threshold is None:
        cap = 1.0 / (params.nu * len(scene))
        params = replace(params, support_threshold=RELATIVE_THRESHOLD * cap)
    return params


def extract_support(alpha: AlphaDistribution, threshold: Optional[float] = None) -> np.ndarray:
    """Indices with ``alpha_i > threshold``; default threshold is ``1e-8 * cap``."""
    if threshold is None:
        threshold = RELATIVE_THRESHOLD * alpha.cap
    return alpha.support(threshold)


@dataclass(frozen=True)
class Selection:
    """Retained points as ``(id, mass)`` pairs sorted by descending mass."""

    selected: tuple[tuple[int, float], ...]
    objective: ObjectiveBreakdown

    def ids(self) -> list[int]:
        return [pid for pid, _ in self.selected]

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.to_dict(),
            "selected": [{"id": pid, "mass": mass} for pid, mass in self.selected],
        }


@dataclass(frozen=True)
class CompressedScene:
    selected: tuple[tuple[int, float], ...]
    source_m: int
    params: CompressionParams
    objective: ObjectiveBreakdown
    initial: Optional[Selection] = None

    @property
    def retained_fraction(self) -> float:
        return len(self.selected) / self.source_m

    def ids(self) -> list[int]:
        return [pid for pid, _ in self.selected]

    def to_dict(self) -> dict:
        doc = {
            "source_m": self.source_m,
            "params": self.params.to_dict(),
            "objective": self.objective.to_dict(),
            "selected": [{"id": pid, "mass": mass} for pid, mass in self.selected],
        }
        if self.initial is not None:
            doc["initial"] = self.initial.to_dict()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _select(scene: SceneModel, alpha: np.ndarray, idx: np.ndarray, scores, params) -> Selection:
    # the reported objective is that of the retained masses
    kept = np.zeros_like(alpha)
    kept[idx] = alpha[idx]
    obj = evaluate(kept, scene, scores, params.tau, params.sigma)
    ids = scene.ids
    pairs = sorted(((int(ids[i]), float(alpha[i])) for i in idx), key=lambda t: (-t[1], t[0]))
    return Selection(tuple(pairs), obj)


def retained_alpha(scene: SceneModel, selected) -> np.ndarray:
    """Rebuild a length-m mass vector from ``(id, mass)`` pairs."""
    index = {int(pid): k for k, pid in enumerate(scene.ids)}
    alpha = np.zeros(len(scene))
    for pid, mass in selected:
        try:
            alpha[index[int(pid)]] = mass
        except KeyError:
            raise ValueError(f"selected id {pid} is not in the scene") from None
    return alpha


def compress(
    scene: SceneModel,
    params: CompressionParams,
    emit_initial: bool = False,
    log_every: int = 0,
) -> CompressedScene:
    params = resolve_params(scene, params)
    scores = compute_scores(scene, params.score)
    m = len(scene)
    init = initialize(scores, params.nu, m)
    initial = None
    if emit_initial:
        initial = _select(scene, init.alpha, init.support(params.support_threshold), scores, params)

    state = SolverState.start(scene, scores, params, init=init)
    run(state, params.iterations, params.pair_strategy, log_every=log_every)
    final = state.distribution()
    chosen = _select(scene, final.alpha, final.support(params.support_threshold), scores, params)
    log.info(
        "kept %d of %d points (%.3f%%), J=%.12g",
        len(chosen.selected),
        m,
        100.0 * len(chosen.selected) / m,
        chosen.objective.total,
    )
    return CompressedScene(
        selected=chosen.selected,
        source_m=m,
        params=params,
        objective=chosen.objective,
        initial=initial,
    )


def compressed_from_dict(doc: dict) -> CompressedScene:
    def sel(items):
        return tuple((int(it["id"]), float(it["mass"])) for it in items)

    initial = None
    if "initial" in doc:
        initial = Selection(sel(doc["initial"]["selected"]), ObjectiveBreakdown(**doc["initial"]["objective"]))
    return CompressedScene(
        selected=sel(doc["selected"]),
        source_m=int(doc["source_m"]),
        params=CompressionParams.from_dict(doc["params"]),
        objective=ObjectiveBreakdown(**doc["objective"]),
        initial=initial,
    )
