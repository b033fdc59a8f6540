"""Permutation-invariant comparison of labelings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


def _labels(g) -> np.ndarray:
    return np.asarray(getattr(g, "assignments", getattr(g, "labels", g)), dtype=np.int64)


def confusion_matrix(g, g_true) -> np.ndarray:
    """Square count matrix ``M[a, b] = #{x : g_x = a, g_true_x = b}``, zero padded."""
    a, b = _labels(g), _labels(g_true)
    if a.shape != b.shape:
        raise ValueError(f"labelings have different lengths: {a.size} vs {b.size}")
    size = int(max(a.max(initial=-1), b.max(initial=-1))) + 1
    cm = np.zeros((size, size), dtype=np.int64)
    np.add.at(cm, (a, b), 1)
    return cm


@dataclass
class EvalReport:
    error_rate: float
    overlap: float | None
    best_permutation: dict

    def to_json(self) -> dict:
        return {"errorRate": self.error_rate, "overlap": self.overlap,
                "bestPermutation": {str(k): int(v) for k, v in self.best_permutation.items()}}


def error_rate(g, g_true, k: int | None = None) -> EvalReport:
    """Smallest fraction of mislabelled nodes over all relabelings of ``g``.

    Solved as a maximum-weight matching on the confusion matrix.
    ``best_permutation`` maps each predicted group to its matched true group.
    """
    cm = confusion_matrix(g, g_true)
    n = int(cm.sum())
    if n == 0:
        raise ValueError("empty labelings")
    rows, cols = linear_sum_assignment(cm, maximize=True)
    matched = int(cm[rows, cols].sum())
    err = (n - matched) / n
    k = k if k is not None else cm.shape[0]
    overlap = overlap_from_error(err, k) if k >= 2 else None
    return EvalReport(err, overlap, dict(zip(rows.tolist(), cols.tolist())))


def overlap_from_error(err: float, k: int) -> float:
    if k < 2:
        raise ValueError("overlap score needs k >= 2 (chance level 1/k would be 1)")
    z_chance = 1.0 / k
    return ((1.0 - err) - z_chance) / (1.0 - z_chance)


def overlap_score(g, g_true, k: int) -> float:
    """Chance-corrected accuracy: 0 for guessing, 1 for a perfect match."""
    return overlap_from_error(error_rate(g, g_true).error_rate, k)


def pairwise_consistency(labelings) -> np.ndarray:
    """Matrix of ``1 - error_rate`` between every pair of labelings."""
    count = len(labelings)
    out = np.ones((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            out[i, j] = out[j, i] = 1.0 - error_rate(labelings[i], labelings[j]).error_rate
    return out


def random_labeling_baseline(n: int, k: int, trials: int, rng) -> tuple:
    """Mean and std of ``1 - error_rate`` between independent uniform labelings."""
    rates = np.array([
        1.0 - error_rate(rng.integers(k, size=n), rng.integers(k, size=n)).error_rate
        for _ in range(trials)
    ])
    return float(rates.mean()), float(rates.std(ddof=1)) if trials > 1 else 0.0
