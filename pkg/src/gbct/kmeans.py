"""Small seeded k-means used for coarse division and binary splits."""
from __future__ import annotations

import numpy as np

# rows per chunk when forming the (n, k, d) difference tensor
_CHUNK_ELEMS = 1 << 22


def sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (len(X), len(C)).

    Differences are formed explicitly rather than via the |x|^2 + |c|^2 - 2xc
    expansion, so results do not degrade when the data sits far from the
    origin.
    """
    n, k = X.shape[0], C.shape[0]
    out = np.empty((n, k))
    step = max(1, _CHUNK_ELEMS // max(1, k * X.shape[1]))
    for s in range(0, n, step):
        diff = X[s : s + step, None, :] - C[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[s : s + step])
    return out


def _assign(X: np.ndarray, C: np.ndarray, x_sq: np.ndarray) -> np.ndarray:
    # X is mean-centred by the caller, which keeps the expansion accurate
    d = x_sq[:, None] - 2.0 * (X @ C.T) + (C * C).sum(axis=1)[None, :]
    return np.argmin(d, axis=1)


def kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; returns indices of the chosen rows."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = sq_dists(X, X[chosen[0]][None, :])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with a center
            break
        idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
        idx = min(idx, n - 1)
        chosen.append(idx)
        np.minimum(closest, sq_dists(X, X[idx][None, :])[:, 0], out=closest)
    return np.array(chosen)


def kmeans(X: np.ndarray, k: int, rng: np.random.Generator, max_iters: int = 100,
           tol: float = 1e-4) -> np.ndarray:
    """Lloyd iterations from k-means++ seeds. Returns a label per row.

    Stops when assignments repeat, when the summed squared center shift
    falls below ``tol`` times the mean per-feature variance, or after
    ``max_iters`` iterations. A cluster that goes empty keeps its old center.
    """
    n = X.shape[0]
    k = max(1, min(k, n))
    X = X - X.mean(axis=0)
    x_sq = (X * X).sum(axis=1)
    threshold = tol * float(X.var(axis=0).mean())
    centers = X[kmeans_pp_init(X, k, rng)].copy()
    kk = centers.shape[0]
    labels = _assign(X, centers, x_sq)
    for _ in range(max_iters):
        counts = np.bincount(labels, minlength=kk)
        live = counts > 0
        sums = np.stack([np.bincount(labels, weights=X[:, j], minlength=kk) for j in range(X.shape[1])], axis=1)
        old = centers.copy()
        centers[live] = sums[live] / counts[live, None]
        new = _assign(X, centers, x_sq)
        if np.array_equal(new, labels):
            break
        labels = new
        if ((centers - old) ** 2).sum() <= threshold:
            break
    return labels
