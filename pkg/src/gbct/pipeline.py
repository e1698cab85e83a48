"""End-to-end GBCT fit with per-phase wall times."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cluster_formation import (
    DEFAULT_JUMP_FACTOR,
    DEFAULT_NOISE_FACTOR,
    BallGraph,
    Clustering,
    adaptive_merge,
    build_graph,
    detect_noise_balls,
    merge_to_k,
)
from .dataset import Dataset
from .granular_ball import BallSet, SplitConfig, coarse_divide, split_all


@dataclass
class FitResult:
    labels: np.ndarray
    balls: BallSet
    graph: BallGraph
    clustering: Clustering
    timings: dict = field(default_factory=dict)  # milliseconds per phase

    @property
    def k(self) -> int:
        return self.clustering.k

    @property
    def m(self) -> int:
        return len(self.balls)


def fit(data, k: Optional[int] = None, split: SplitConfig = SplitConfig(),
        noise_factor: float = DEFAULT_NOISE_FACTOR,
        jump_factor: float = DEFAULT_JUMP_FACTOR, knee: str = "merge",
        density_average: str = "arithmetic") -> FitResult:
    """Cluster ``data`` into ``k`` clusters, or pick K adaptively when k is None."""
    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    timings = {}
    t0 = time.perf_counter()
    coarse = coarse_divide(X, split)
    t1 = time.perf_counter()
    balls = split_all(X, coarse, split)
    t2 = time.perf_counter()
    graph = build_graph(balls)
    noise = detect_noise_balls(balls, noise_factor, density_average)
    if k is None:
        clustering = adaptive_merge(balls, graph, jump_factor=jump_factor, knee=knee, noise=noise)
    else:
        clustering = merge_to_k(balls, graph, k, noise=noise)
    t3 = time.perf_counter()
    timings["coarse_ms"] = (t1 - t0) * 1e3
    timings["fine_ms"] = (t2 - t1) * 1e3
    timings["split_ms"] = (t2 - t0) * 1e3
    timings["merge_ms"] = (t3 - t2) * 1e3
    timings["total_ms"] = (t3 - t0) * 1e3
    return FitResult(clustering.point_labels, balls, graph, clustering, timings)
