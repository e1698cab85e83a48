"""Granular balls: statistics, coarse k-means division and adaptive binary splitting.

Densities follow count / radius**d and are carried as logarithms, since
radius**d leaves double range quickly once d reaches a few hundred.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .dataset import Dataset
from .kmeans import kmeans

LOG_INF = math.inf


class SplitAcceptance(str, enum.Enum):
    BOTH_CHILDREN_DENSER = "both_children_denser"
    EITHER_CHILD_DENSER = "either_child_denser"
    CHILDREN_CONSISTENT = "children_consistent"


# short names used on the command line
POLICY_ALIASES = {
    "both": SplitAcceptance.BOTH_CHILDREN_DENSER,
    "either": SplitAcceptance.EITHER_CHILD_DENSER,
    "consistent": SplitAcceptance.CHILDREN_CONSISTENT,
}


@dataclass(frozen=True)
class SplitConfig:
    consistency_threshold: float = 0.70
    coarse_count: Optional[int] = None  # None -> floor(sqrt(n))
    split_acceptance: SplitAcceptance = SplitAcceptance.BOTH_CHILDREN_DENSER
    kmeans_max_iters: int = 100
    seed: int = 42

    def __post_init__(self):
        if not 0 < self.consistency_threshold < 1:
            raise ValueError("consistency_threshold must lie in (0, 1)")
        if self.coarse_count is not None and self.coarse_count < 1:
            raise ValueError("coarse_count must be at least 1")
        if self.kmeans_max_iters < 1:
            raise ValueError("kmeans_max_iters must be at least 1")
        object.__setattr__(self, "split_acceptance", SplitAcceptance(self.split_acceptance))

    def coarse_k(self, n: int) -> int:
        return self.coarse_count if self.coarse_count is not None else max(1, math.isqrt(n))


@dataclass(frozen=True, eq=False)
class GranularBall:
    """A set of point indices and the statistics derived from them.

    Single-point balls (and balls whose members all coincide) have zero
    radius; both densities are then +inf and consistency is 1.
    """

    members: np.ndarray
    center: np.ndarray
    max_radius: float
    avg_radius: float
    log_max_density: float
    log_avg_density: float
    consistency: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def max_density(self) -> float:
        return math.exp(self.log_max_density) if self.log_max_density < LOG_INF else math.inf

    @property
    def avg_density(self) -> float:
        return math.exp(self.log_avg_density) if self.log_avg_density < LOG_INF else math.inf

    def __len__(self):
        return self.size


@dataclass(frozen=True, eq=False)
class BallSet:
    """The m balls covering a dataset of n points."""

    balls: tuple
    n: int
    dim: int
    centers: np.ndarray = field(init=False, repr=False)
    radii: np.ndarray = field(init=False, repr=False)
    sizes: np.ndarray = field(init=False, repr=False)
    log_max_density: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        balls = tuple(self.balls)
        object.__setattr__(self, "balls", balls)
        if balls:
            centers = np.vstack([b.center for b in balls])
        else:
            centers = np.empty((0, self.dim))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", np.array([b.max_radius for b in balls], dtype=float))
        object.__setattr__(self, "sizes", np.array([b.size for b in balls], dtype=np.int64))
        object.__setattr__(self, "log_max_density", np.array([b.log_max_density for b in balls], dtype=float))

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def __getitem__(self, i):
        return self.balls[i]

    @property
    def m(self) -> int:
        return len(self.balls)

    def point_to_ball(self) -> np.ndarray:
        """Ball index for every point; -1 where a point is uncovered."""
        owner = np.full(self.n, -1, dtype=np.int64)
        for j, b in enumerate(self.balls):
            owner[b.members] = j
        return owner

    def is_partition(self) -> bool:
        if not self.balls:
            return self.n == 0
        allm = np.concatenate([b.members for b in self.balls])
        return len(allm) == self.n and np.array_equal(np.sort(allm), np.arange(self.n))


def _points(data: Union[Dataset, np.ndarray]) -> np.ndarray:
    return data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)


def fit_stats(data: Union[Dataset, np.ndarray], members: Sequence[int]) -> GranularBall:
    """Center, radii, densities and consistency for one member set."""
    idx = np.unique(np.asarray(members, dtype=np.int64))
    if idx.size == 0:
        raise ValueError("a granular ball needs at least one member")
    X = _points(data)[idx]
    d = X.shape[1]
    center = X.mean(axis=0)
    dist = np.sqrt(((X - center) ** 2).sum(axis=1))
    r = float(dist.max())
    r_ave = float(dist.mean())
    if r == 0.0:
        return GranularBall(idx, center, 0.0, 0.0, LOG_INF, LOG_INF, 1.0)

    log_max = math.log(idx.size) - d * math.log(r)
    # the mean of identical distances can round just below them; ties count as inside
    inside = int(np.count_nonzero(dist <= r_ave * (1 + 1e-12)))
    log_avg = math.log(inside) - d * math.log(r_ave)
    con = math.exp(-abs(log_max - log_avg))
    return GranularBall(idx, center, r, r_ave, log_max, log_avg, con)


def consistency(ball: GranularBall) -> float:
    return ball.consistency


def coarse_divide(data: Union[Dataset, np.ndarray], cfg: SplitConfig = SplitConfig()) -> BallSet:
    """Partition the data into at most floor(sqrt(n)) balls with k-means."""
    X = _points(data)
    n = X.shape[0]
    rng = np.random.default_rng(cfg.seed)
    labels = kmeans(X, cfg.coarse_k(n), rng, cfg.kmeans_max_iters)
    balls = [fit_stats(X, np.flatnonzero(labels == j)) for j in np.unique(labels)]
    return BallSet(tuple(balls), n, X.shape[1])


def binary_split(data: Union[Dataset, np.ndarray], ball: GranularBall,
                 cfg: SplitConfig = SplitConfig()) -> tuple[GranularBall, GranularBall]:
    """2-means split of a ball into two non-empty children."""
    if ball.size < 2:
        raise ValueError("cannot split a ball with fewer than 2 members")
    X = _points(data)
    members = ball.members
    # seeding from the member set keeps the result independent of sweep order
    rng = np.random.default_rng([cfg.seed, int(members[0]), ball.size])
    labels = kmeans(X[members], 2, rng, cfg.kmeans_max_iters)
    left = members[labels == labels[0]]
    right = members[labels != labels[0]]
    if right.size == 0:
        # coincident points: any split is as good as another
        half = ball.size // 2
        left, right = members[:half], members[half:]
    return fit_stats(X, left), fit_stats(X, right)


def _accept(parent: GranularBall, a: GranularBall, b: GranularBall, cfg: SplitConfig) -> bool:
    if a.size < 2 or b.size < 2:
        return False
    policy = cfg.split_acceptance
    if policy is SplitAcceptance.BOTH_CHILDREN_DENSER:
        return a.log_max_density > parent.log_max_density and b.log_max_density > parent.log_max_density
    if policy is SplitAcceptance.EITHER_CHILD_DENSER:
        return a.log_max_density > parent.log_max_density or b.log_max_density > parent.log_max_density
    thr = cfg.consistency_threshold
    return a.consistency >= thr and b.consistency >= thr


def split_all(data: Union[Dataset, np.ndarray], balls: BallSet,
              cfg: SplitConfig = SplitConfig()) -> BallSet:
    """Split low-consistency balls until a sweep accepts nothing.

    A ball whose split is rejected is kept and never tried again; its
    statistics cannot change, so neither could the outcome.
    """
    X = _points(data)
    thr = cfg.consistency_threshold
    current = [(b, b.size < 2 or b.consistency >= thr) for b in balls]
    while True:
        grew = False
        nxt = []
        for ball, final in current:
            if final:
                nxt.append((ball, True))
                continue
            a, b = binary_split(X, ball, cfg)
            if _accept(ball, a, b, cfg):
                nxt.append((a, a.consistency >= thr))
                nxt.append((b, b.consistency >= thr))
                grew = True
            else:
                nxt.append((ball, True))
        current = nxt
        if not grew:
            break
    return BallSet(tuple(b for b, _ in current), balls.n, balls.dim)


def generate_balls(data: Union[Dataset, np.ndarray], cfg: SplitConfig = SplitConfig()) -> BallSet:
    """Coarse division followed by adaptive splitting."""
    return split_all(data, coarse_divide(data, cfg), cfg)
