"""Ball graph, noise balls, round-based merging and adaptive K.

Merging works on shifted boundary distances. Similarity is their
reciprocal, so "most similar" and "nearest" pick the same pair; the code
compares distances directly to avoid dividing by a zero shift.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, KUnreachableError
from .granular_ball import BallSet
from .kmeans import sq_dists

DEFAULT_NOISE_FACTOR = 0.2
DEFAULT_JUMP_FACTOR = 2.0


@dataclass(frozen=True, eq=False)
class BallGraph:
    raw: np.ndarray
    delta: float
    shifted: np.ndarray
    sim: np.ndarray

    @property
    def m(self) -> int:
        return self.raw.shape[0]


@dataclass(frozen=True)
class MergeRound:
    round_index: int
    merges: tuple  # ((ball_i, ball_j), ...) realizing each applied link
    min_merge_distance: float
    clusters_after: int
    distances: tuple = ()  # shifted distance of each applied merge, in order


@dataclass(frozen=True, eq=False)
class Clustering:
    ball_labels: np.ndarray
    point_labels: np.ndarray
    k: int
    trace: tuple = ()
    noise_balls: frozenset = frozenset()
    knee_detected: Optional[bool] = None  # only set by adaptive_merge
    cut_merges: Optional[int] = None  # merges from the trace applied to reach this clustering
    knee_ratio: Optional[float] = None


def build_graph(balls, radii: Optional[Sequence[float]] = None) -> BallGraph:
    """Pairwise boundary distances, delta shift and similarities.

    Accepts a :class:`BallSet`, or an (m, d) center array plus ``radii``.
    """
    if isinstance(balls, BallSet):
        centers, r = balls.centers, balls.radii
    else:
        centers = np.atleast_2d(np.asarray(balls, dtype=float))
        r = np.asarray(radii, dtype=float)
    m = centers.shape[0]
    if m < 2:
        raise DegenerateInputError("need at least two balls to build a graph")
    raw = np.sqrt(sq_dists(centers, centers)) - (r[:, None] + r[None, :])
    np.fill_diagonal(raw, 0.0)
    lowest = float(raw[np.triu_indices(m, 1)].min())
    delta = 2.0 * abs(lowest) if lowest < 0 else 0.0
    shifted = raw + delta
    np.fill_diagonal(shifted, 0.0)
    with np.errstate(divide="ignore"):
        sim = np.where(shifted > 0, 1.0 / np.where(shifted > 0, shifted, 1.0), np.inf)
    np.fill_diagonal(sim, 0.0)
    for a in (raw, shifted, sim):
        a.setflags(write=False)
    return BallGraph(raw, delta, shifted, sim)


def detect_noise_balls(balls: BallSet, noise_factor: float = DEFAULT_NOISE_FACTOR,
                       average: str = "arithmetic") -> frozenset:
    """Singleton balls plus balls whose density is below noise_factor x the mean.

    The mean is taken over the max-radius densities of balls with at least
    two members. ``average="arithmetic"`` (the default) is the plain mean of
    count / r**d; ``"geometric"`` averages log densities instead, so a single
    pair of near-coincident points cannot drag every other ball below the
    cutoff.
    Zero-radius multi-point balls are infinitely dense: never noise and left
    out of the mean.
    """
    if average not in ("geometric", "arithmetic"):
        raise ValueError(f"unknown average {average!r}")
    sizes = balls.sizes
    logd = balls.log_max_density
    multi = sizes >= 2
    finite = multi & np.isfinite(logd)
    noise = set(np.flatnonzero(~multi).tolist())
    if finite.any():
        vals = logd[finite]
        if average == "geometric":
            log_mean = float(vals.mean())
        else:
            top = vals.max()
            log_mean = top + math.log(np.exp(vals - top).sum()) - math.log(vals.size)
        cutoff = math.log(noise_factor) + log_mean if noise_factor > 0 else -math.inf
        noise.update(np.flatnonzero(finite & (logd < cutoff)).tolist())
    if len(noise) == len(balls):
        raise DegenerateInputError("every ball is noise; nothing to cluster")
    return frozenset(int(i) for i in noise)


def cluster_similarity(a: Iterable[int], b: Iterable[int], graph: BallGraph) -> float:
    """Similarity of the nearest ball pair across two clusters."""
    a, b = list(a), list(b)
    return float(graph.sim[np.ix_(a, b)].max())


# ---------------------------------------------------------------- merging


class _UnionFind:
    def __init__(self, n):
        self.parent = np.arange(n)
        self.count = n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # smaller root wins so labels do not depend on union order
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count -= 1
        return True

    def roots(self):
        return np.array([self.find(i) for i in range(len(self.parent))])


def _best_links(D: np.ndarray, roots: np.ndarray):
    """Each cluster's nearest outside ball pair.

    Returns rows (distance, i, j) with i < j, one per cluster, sorted by
    distance then by (i, j).
    """
    same = roots[:, None] == roots[None, :]
    Dm = np.where(same, np.inf, D)
    nearest = np.argmin(Dm, axis=1)  # first index wins ties
    dist = Dm[np.arange(len(roots)), nearest]
    lo = np.minimum(np.arange(len(roots)), nearest)
    hi = np.maximum(np.arange(len(roots)), nearest)
    order = np.lexsort((hi, lo, dist, roots))
    first = np.ones(len(order), dtype=bool)
    first[1:] = roots[order][1:] != roots[order][:-1]
    best = order[first]
    rows = sorted(zip(dist[best].tolist(), lo[best].tolist(), hi[best].tolist()))
    return rows


class _Schedule:
    """Round-structured merging over the non-noise balls.

    ``D`` is the shifted distance matrix restricted to those balls, with an
    infinite diagonal. Ball indices inside are local (0..len(D)-1).
    """

    def __init__(self, D: np.ndarray, full_second_round: bool = False):
        self.D = D
        self.full_second_round = full_second_round
        self.uf = _UnionFind(len(D))
        self._pairs = None
        self.rounds: list[MergeRound] = []
        self.states: list[np.ndarray] = [self.uf.roots()]

    @property
    def clusters(self) -> int:
        return self.uf.count

    def _reaches(self, links, k: int) -> bool:
        uf = _UnionFind(len(self.D))
        uf.parent = self.uf.parent.copy()
        uf.count = self.uf.count
        for _, i, j in links:
            uf.union(i, j)
        return uf.count <= k

    def _pair_order(self):
        if self._pairs is None:
            iu, ju = np.triu_indices(len(self.D), 1)
            d = self.D[iu, ju]
            order = np.lexsort((ju, iu, d))
            self._pairs = (d[order], iu[order], ju[order])
        return self._pairs

    def _nearest_first(self, k: int):
        """Merge the globally nearest cluster pair, one at a time, until k remain."""
        applied = []
        for dist, i, j in zip(*self._pair_order()):
            if self.clusters <= k:
                break
            if self.uf.union(int(i), int(j)):
                applied.append((float(dist), int(i), int(j)))
        return applied

    def step(self, k: int) -> None:
        t = len(self.rounds) + 1
        links = _best_links(self.D, self.uf.roots())
        if t > 2:
            links = links[: self.clusters - k]
        stops = t > 2 or (t == 2 and not self.full_second_round)
        applied = []
        if stops and self._reaches(links, k):
            # links chosen at the start of the round are stale once merges
            # begin; in the round that lands on k, take true nearest pairs
            applied = self._nearest_first(k)
            links = []
        for dist, i, j in links:
            if stops and self.clusters <= k:
                break
            if self.uf.union(i, j):
                applied.append((dist, i, j))
        self.rounds.append(MergeRound(
            round_index=t,
            merges=tuple((i, j) for _, i, j in applied),
            min_merge_distance=min(d for d, _, _ in applied),
            clusters_after=self.clusters,
            distances=tuple(d for d, _, _ in applied),
        ))
        self.states.append(self.uf.roots())

    def run(self, k: int) -> None:
        if self.clusters >= 2:
            self.step(k)
        while self.clusters > k:
            self.step(k)


def _finalize(balls: BallSet, graph: BallGraph, active: np.ndarray, roots: np.ndarray,
              noise: frozenset, trace, **extra) -> Clustering:
    m = len(balls)
    labels = np.full(m, -1, dtype=np.int64)
    labels[active] = roots
    if noise:
        nz = np.array(sorted(noise))
        sub = graph.shifted[np.ix_(nz, active)]
        labels[nz] = labels[active[np.argmin(sub, axis=1)]]
    owner = balls.point_to_ball()
    ball_labels, point_labels = _renumber(labels, owner)
    # report global ball indices
    g_trace = tuple(
        MergeRound(r.round_index, tuple((int(active[i]), int(active[j])) for i, j in r.merges),
                   r.min_merge_distance, r.clusters_after, r.distances)
        for r in trace
    )
    return Clustering(ball_labels, point_labels, int(len(np.unique(ball_labels))), g_trace,
                      frozenset(noise), **extra)


def _renumber(ball_labels: np.ndarray, owner: np.ndarray):
    """Relabel clusters 0..K-1 in order of first appearance over the points."""
    mapping = {}
    for lab in ball_labels[owner]:
        mapping.setdefault(int(lab), len(mapping))
    for lab in ball_labels:
        mapping.setdefault(int(lab), len(mapping))
    new_balls = np.array([mapping[int(v)] for v in ball_labels], dtype=np.int64)
    return new_balls, new_balls[owner]


def _prepare(balls: BallSet, graph: Optional[BallGraph], noise, noise_factor):
    if graph is None:
        graph = build_graph(balls)
    if noise is None:
        noise = detect_noise_balls(balls, noise_factor)
    noise = frozenset(int(i) for i in noise)
    active = np.array([i for i in range(len(balls)) if i not in noise], dtype=np.int64)
    D = np.array(graph.shifted[np.ix_(active, active)], dtype=float)
    np.fill_diagonal(D, np.inf)
    return graph, noise, active, D


def merge_to_k(balls: BallSet, graph: Optional[BallGraph], k: int, *,
               noise: Optional[Iterable[int]] = None,
               noise_factor: float = DEFAULT_NOISE_FACTOR,
               full_second_round: bool = False) -> Clustering:
    """Merge non-noise balls into exactly k clusters, then attach noise balls.

    Round 1 links every cluster to its nearest one and always runs in full.
    Round 2 does the same (unless ``full_second_round`` it may stop at k).
    Later rounds apply only the M-k best links, nearest first. The round
    whose links would bring the count to k or below instead merges the
    nearest cluster pair one at a time until exactly k remain. Each noise
    ball finally joins the cluster of its nearest non-noise ball.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    graph, noise, active, D = _prepare(balls, graph, noise, noise_factor)
    if len(active) < k:
        raise KUnreachableError(f"only {len(active)} non-noise balls for k={k}")
    sched = _Schedule(D, full_second_round)
    sched.run(k)
    if sched.clusters < k:
        raise KUnreachableError(
            f"K unreachable after mandatory rounds: {sched.clusters} clusters remain, k={k}"
        )
    n_merges = sum(len(r.merges) for r in sched.rounds)
    return _finalize(balls, graph, active, sched.states[-1], noise, tuple(sched.rounds),
                     cut_merges=n_merges)


def _roots_after(n: int, merges, count: int) -> np.ndarray:
    uf = _UnionFind(n)
    for i, j in merges[:count]:
        uf.union(i, j)
    return uf.roots()


def _merge_knee(rounds, jump_factor):
    """Largest jump of a merge distance over every distance merged before it.

    Only merges after round 1 are cut candidates. Returns (merges kept, ratio)
    or None.
    """
    best, best_ratio = None, -math.inf
    running = -math.inf
    pos = 0
    for r in rounds:
        for d in r.distances:
            if r.round_index > 1 and d > 0:
                ratio = d / running if running > 0 else math.inf
                if ratio >= jump_factor and ratio > best_ratio:
                    best, best_ratio = pos, ratio
            running = max(running, d)
            pos += 1
    return None if best is None else (best, best_ratio)


def _round_knee(rounds, jump_factor):
    """Largest ratio between consecutive per-round minimum merge distances."""
    best, best_ratio = None, -math.inf
    done = 0
    for prev, cur in zip(rounds, rounds[1:]):
        done += len(prev.merges)
        if prev.clusters_after < 2:
            break
        ratio = cur.min_merge_distance / prev.min_merge_distance if prev.min_merge_distance > 0 else math.inf
        if ratio >= jump_factor and ratio > best_ratio:
            best, best_ratio = done, ratio
    return None if best is None else (best, best_ratio)


KNEE_RULES = {"merge": _merge_knee, "round": _round_knee}


def adaptive_merge(balls: BallSet, graph: Optional[BallGraph] = None, *,
                   jump_factor: float = DEFAULT_JUMP_FACTOR,
                   knee: str = "merge",
                   noise: Optional[Iterable[int]] = None,
                   noise_factor: float = DEFAULT_NOISE_FACTOR) -> Clustering:
    """Choose K from the first big jump in merge distance, in a single run.

    The schedule is run down to one cluster while every applied merge and
    its shifted distance is recorded. With ``knee="merge"`` each merge after
    round 1 is compared to the largest distance merged before it; with
    ``knee="round"`` each round's minimum merge distance is compared to the
    previous round's. The clustering just before the largest ratio (at least
    ``jump_factor``) is returned. If nothing jumps, everything ends up in one
    cluster and ``knee_detected`` is False.
    """
    if knee not in KNEE_RULES:
        raise ValueError(f"unknown knee rule {knee!r}")
    graph, noise, active, D = _prepare(balls, graph, noise, noise_factor)
    if len(active) < 2:
        raise DegenerateInputError("adaptive merging needs at least two non-noise balls")
    sched = _Schedule(D)
    sched.run(1)
    rounds = tuple(sched.rounds)
    found = KNEE_RULES[knee](rounds, jump_factor)
    if found is None:
        return _finalize(balls, graph, active, sched.states[-1], noise, rounds,
                         knee_detected=False, cut_merges=len(active) - 1)
    kept, ratio = found
    merges = [mg for r in rounds for mg in r.merges]
    roots = _roots_after(len(active), merges, kept)
    return _finalize(balls, graph, active, roots, noise, rounds,
                     knee_detected=True, cut_merges=kept, knee_ratio=ratio)


def point_labels(clustering: Clustering, balls: BallSet) -> np.ndarray:
    return _renumber(np.asarray(clustering.ball_labels), balls.point_to_ball())[1]


def write_trace_csv(path, trace: Sequence[MergeRound]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round_index", "merges_applied", "min_merge_distance"])
        for r in trace:
            w.writerow([r.round_index, len(r.merges), repr(float(r.min_merge_distance))])
