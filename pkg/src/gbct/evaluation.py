"""External clustering scores: best-match accuracy (ACC) and NMI."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dataset import NOISE_LABEL


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # rows: predicted clusters, cols: true classes
    pred_ids: np.ndarray
    true_ids: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _clean(pred, truth):
    pred = np.asarray(pred).astype(np.int64).ravel()
    truth = np.asarray(truth).astype(np.int64).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {truth.size} truth labels")
    if pred.size == 0:
        raise ValueError("empty label sequences")
    keep = truth != NOISE_LABEL
    if not keep.any():
        raise ValueError("every truth label is noise")
    return pred[keep], truth[keep]


def contingency(pred, truth) -> ContingencyTable:
    pred, truth = _clean(pred, truth)
    p_ids, p_inv = np.unique(pred, return_inverse=True)
    t_ids, t_inv = np.unique(truth, return_inverse=True)
    counts = np.zeros((p_ids.size, t_ids.size), dtype=np.int64)
    np.add.at(counts, (p_inv, t_inv), 1)
    return ContingencyTable(counts, p_ids, t_ids)


def optimal_label_map(table: ContingencyTable) -> dict:
    """Injective predicted->true mapping maximizing matched points."""
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return {int(table.pred_ids[r]): int(table.true_ids[c]) for r, c in zip(rows, cols)}


def accuracy(pred, truth) -> float:
    table = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[rows, cols].sum()) / table.n


def _entropy(counts, n):
    # a single cluster has zero entropy exactly, not a rounding residue
    if counts.size == 1:
        return 0.0
    p = np.sort(counts) / n
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth, average: str = "geometric") -> float:
    """Mutual information normalized by the geometric (or arithmetic) mean entropy.

    Terms are summed in sorted order, so the value is bit-identical under any
    relabeling of either side.
    """
    table = contingency(pred, truth)
    n = table.n
    a, b = table.counts.sum(axis=1), table.counts.sum(axis=0)
    hu, hv = _entropy(a, n), _entropy(b, n)
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    rows, cols = np.nonzero(table.counts)
    c = table.counts[rows, cols].astype(float)
    terms = c / n * np.log(c * n / (a[rows].astype(float) * b[cols]))
    mi = float(np.sort(terms).sum())
    if average == "geometric":
        denom = math.sqrt(hu * hv)
    elif average == "arithmetic":
        denom = (hu + hv) / 2
    else:
        raise ValueError(f"unknown normalization {average!r}")
    return min(1.0, max(0.0, mi / denom))
