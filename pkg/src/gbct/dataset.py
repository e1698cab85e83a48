"""Dataset container, CSV I/O, synthetic generators and preprocessing."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DatasetError

NOISE_LABEL = -1

SHAPES = ("moons", "circles", "blobs", "spiral")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """n points in d dimensions with optional integer labels.

    ``points`` is an (n, d) float array; ``labels`` is None or an (n,) int
    array. Both are stored read-only.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DatasetError(f"points must be a non-empty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DatasetError("points contain NaN or Inf")
        object.__setattr__(self, "points", _frozen(pts))
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise DatasetError(f"expected {pts.shape[0]} labels, got shape {lab.shape}")
            if lab.size and not np.all(lab == np.round(lab)):
                raise DatasetError("labels must be integers")
            object.__setattr__(self, "labels", _frozen(lab.astype(np.int64)))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


# ---------------------------------------------------------------- CSV


def load_csv(path, has_header: bool = False, label_col: Optional[int] = None) -> Dataset:
    """Read a comma-separated numeric file.

    ``label_col`` (0-based, negative indices allowed) is removed from the
    features and returned as integer labels.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if has_header:
        rows = rows[1:]
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    width = len(rows[0])
    first_row = 2 if has_header else 1
    if label_col is not None:
        if not -width <= label_col < width:
            raise DatasetError(f"label column {label_col} out of range for {width} columns")
        label_col %= width

    feats, labels = [], []
    for i, row in enumerate(rows):
        lineno = i + first_row
        if len(row) != width:
            raise DatasetError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        vals = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == label_col:
                try:
                    labels.append(_parse_int(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-integer label {cell!r} at row {lineno}, column {j}"
                    ) from None
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric cell {cell!r} at row {lineno}, column {j}"
                ) from None
            if not math.isfinite(v):
                raise DatasetError(f"{path}: non-finite value at row {lineno}, column {j}")
            vals.append(v)
        feats.append(vals)

    if label_col is not None and width == 1:
        raise DatasetError("label column leaves no feature columns")
    return Dataset(np.array(feats, dtype=float), np.array(labels) if label_col is not None else None)


def _parse_int(cell: str) -> int:
    v = float(cell)
    if not v.is_integer():
        raise ValueError(cell)
    return int(v)


def load_labels_csv(path) -> np.ndarray:
    """Read a one-label-per-line file (as written by :func:`save_labels_csv`)."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    out = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(_parse_int(line))
            except ValueError:
                raise DatasetError(f"{path}: non-integer label {line!r} at row {lineno}") from None
    return np.array(out, dtype=np.int64)


def save_labels_csv(path, labels: Sequence[int]) -> None:
    labels = [int(v) for v in labels]
    if not labels:
        raise DatasetError("refusing to write an empty label file")
    Path(path).write_text("".join(f"{v}\n" for v in labels))


def save_csv(path, ds: Dataset) -> None:
    """Write features (and labels as the last column, if present) without a header."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i, row in enumerate(ds.points):
            cells = [repr(float(v)) for v in row]
            if ds.labels is not None:
                cells.append(str(int(ds.labels[i])))
            w.writerow(cells)


# ---------------------------------------------------------------- generators


def _split_counts(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def _check_jitter(jitter):
    if jitter < 0:
        raise ValueError(f"jitter must be non-negative, got {jitter}")


def _moons(n, rng, jitter=0.05):
    _check_jitter(jitter)
    n_out, n_in = _split_counts(n, 2)
    t_out = np.linspace(0.0, math.pi, n_out)
    t_in = np.linspace(0.0, math.pi, n_in)
    outer = np.column_stack([np.cos(t_out), np.sin(t_out)])
    inner = np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)])
    X = np.vstack([outer, inner])
    y = np.repeat([0, 1], [n_out, n_in])
    if jitter:
        X = X + rng.normal(scale=jitter, size=X.shape)
    return X, y


def _circles(n, rng, jitter=0.03, rings=2, factor=0.5):
    _check_jitter(jitter)
    if rings < 1:
        raise ValueError("circles needs at least one ring")
    if not 0 < factor < 1:
        raise ValueError("factor must lie in (0, 1)")
    # outermost ring has radius 1; ring i has radius factor**i
    parts, labels = [], []
    for i, cnt in enumerate(_split_counts(n, rings)):
        t = np.linspace(0.0, 2 * math.pi, cnt, endpoint=False)
        parts.append(factor**i * np.column_stack([np.cos(t), np.sin(t)]))
        labels.append(np.full(cnt, i))
    X = np.vstack(parts)
    if jitter:
        X = X + rng.normal(scale=jitter, size=X.shape)
    return X, np.concatenate(labels)


def _blobs(n, rng, centers=3, std=1.0, box=(-10.0, 10.0), dim=2):
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    if np.isscalar(centers):
        if int(centers) < 1:
            raise ValueError("blobs needs at least one center")
        centers = rng.uniform(box[0], box[1], size=(int(centers), dim))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] < 1:
        raise ValueError("blobs needs at least one center")
    parts, labels = [], []
    for i, cnt in enumerate(_split_counts(n, centers.shape[0])):
        parts.append(centers[i] + rng.normal(scale=std, size=(cnt, centers.shape[1])))
        labels.append(np.full(cnt, i))
    return np.vstack(parts), np.concatenate(labels)


def _spiral(n, rng, jitter=0.02, turns=1.5):
    _check_jitter(jitter)
    if turns <= 0:
        raise ValueError("turns must be positive")
    parts, labels = [], []
    for arm, cnt in enumerate(_split_counts(n, 2)):
        # start a quarter turn out so the arms do not meet at the origin
        theta = np.linspace(math.pi / 2, 2 * math.pi * turns + math.pi / 2, cnt)
        r = theta / (2 * math.pi * turns + math.pi / 2)
        phase = arm * math.pi
        parts.append(np.column_stack([r * np.cos(theta + phase), r * np.sin(theta + phase)]))
        labels.append(np.full(cnt, arm))
    X = np.vstack(parts)
    if jitter:
        X = X + rng.normal(scale=jitter, size=X.shape)
    return X, np.concatenate(labels)


_GENERATORS = {"moons": _moons, "circles": _circles, "blobs": _blobs, "spiral": _spiral}


def _cluster_count(shape, params):
    if shape == "circles":
        return int(params.get("rings", 2))
    if shape == "blobs":
        c = params.get("centers", 3)
        return int(c) if np.isscalar(c) else len(c)
    return 2


def generate(shape: str, n: int, params: Optional[dict] = None, seed: int = 0) -> Dataset:
    """Labeled synthetic data.

    Shape parameters (all optional):

    * moons: ``jitter``
    * circles: ``jitter``, ``rings``, ``factor`` (radius ratio between rings)
    * blobs: ``centers`` (count or explicit array), ``std``, ``box``, ``dim``
    * spiral: ``jitter``, ``turns``

    Rows are shuffled with the same seed, so output depends only on the
    arguments.
    """
    if shape not in _GENERATORS:
        raise ValueError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    params = dict(params or {})
    k = _cluster_count(shape, params)
    if k < 1:
        raise ValueError("cluster count must be at least 1")
    if n < 2 * k:
        raise ValueError(f"{shape} with {k} clusters needs n >= {2 * k}, got {n}")
    rng = np.random.default_rng(seed)
    X, y = _GENERATORS[shape](n, rng, **params)
    order = rng.permutation(n)
    return Dataset(X[order], y[order])


# ---------------------------------------------------------------- preprocessing


def inject_noise(ds: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Append ceil(fraction * n) uniform points over the bounding box, labeled -1."""
    if not 0 <= fraction < 1:
        raise ValueError(f"fraction must lie in [0, 1), got {fraction}")
    count = math.ceil(fraction * ds.n)
    if count == 0:
        return ds
    rng = np.random.default_rng(seed)
    lo, hi = ds.points.min(axis=0), ds.points.max(axis=0)
    noise = rng.uniform(lo, hi, size=(count, ds.dim))
    labels = ds.labels if ds.labels is not None else np.zeros(ds.n, dtype=np.int64)
    return Dataset(
        np.vstack([ds.points, noise]),
        np.concatenate([labels, np.full(count, NOISE_LABEL)]),
    )


def standardize(ds: Dataset) -> Dataset:
    """Zero mean, unit population std per column; constant columns pass through."""
    X = ds.points
    if X.shape[0] < 2:
        raise ValueError("standardize needs at least two points")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    keep = std > 0
    out = X.copy()
    out[:, keep] = (X[:, keep] - mean[keep]) / std[keep]
    return Dataset(out, ds.labels)
