"""Parameter dataclasses shared by the scoring, solver and CLI layers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

SCORE_KINDS = ("avg_distance", "camera_fraction", "camera_max_fraction", "combination")
PAIR_STRATEGIES = ("uniform", "active")

DEFAULT_ITERATIONS = 4096
DEFAULT_KERNEL_CACHE_MB = 512.0


@dataclass(frozen=True)
class ScoreConfig:
    kind: str = "avg_distance"
    # None means "mean pair distance of the scene"
    beta: Optional[float] = None
    weight: float = 0.5

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"score kind must be one of {SCORE_KINDS}, got {self.kind!r}")
        if self.beta is not None and not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must lie in [0, 1], got {self.weight}")


@dataclass(frozen=True)
class CompressionParams:
    nu: float = 0.05
    tau: float = 1.0
    sigma: float = 1.0
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0
    pair_strategy: str = "uniform"
    score: ScoreConfig = field(default_factory=ScoreConfig)
    # None means 1e-8 * cap
    support_threshold: Optional[float] = None
    kernel_cache_mb: float = DEFAULT_KERNEL_CACHE_MB

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.pair_strategy not in PAIR_STRATEGIES:
            raise ValueError(f"pair_strategy must be one of {PAIR_STRATEGIES}")
        if self.support_threshold is not None and not self.support_threshold >= 0:
            raise ValueError("support_threshold must be >= 0")
        if not self.kernel_cache_mb > 0:
            raise ValueError("kernel_cache_mb must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "CompressionParams":
        doc = dict(doc)
        if isinstance(doc.get("score"), dict):
            doc["score"] = ScoreConfig(**doc["score"])
        return cls(**doc)

    def with_beta(self, beta: float) -> "CompressionParams":
        return replace(self, score=replace(self.score, beta=beta))
