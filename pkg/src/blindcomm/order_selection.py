"""Model-order selection from covariance eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import SpectralSummary
from .errors import AssumptionViolatedError
from .theory import FilterConstants, analytic_spectrum

# Eigenvalues are clamped below at CLAMP_RTOL * largest before taking logs.
CLAMP_RTOL = 1e-12


@dataclass
class OrderEstimate:
    k_star: int
    curve: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kStar": int(self.k_star), "curve": [float(v) for v in self.curve],
                "method": self.method, **self.meta}


def _check_descending(eigenvalues: np.ndarray) -> None:
    if np.any(np.diff(eigenvalues) > 1e-12 * max(abs(eigenvalues[0]), 1.0)):
        raise ValueError("eigenvalues must be sorted in descending order")


def mdl_curve(eigenvalues, m: int) -> np.ndarray:
    """MDL value for every ``p = 1..n`` (entry ``p - 1``).

    ``(p - n) log(geometric mean / arithmetic mean of the tail) + p (2n - p) log(m) / (2m)``.
    The tail is empty at ``p = n`` and its term is taken as zero.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    _check_descending(lam)
    if m < 2:
        raise ValueError("m must be at least 2")
    n = lam.size
    eps = CLAMP_RTOL * lam[0] if lam[0] > 0 else CLAMP_RTOL
    lam = np.maximum(lam, eps)
    # Tail sums over j = p+1..n for p = 0..n via reversed cumulative sums.
    log_tail = np.concatenate([np.cumsum(np.log(lam)[::-1])[::-1], [0.0]])
    sum_tail = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])
    p = np.arange(1, n + 1)
    tail_len = n - p
    fit = np.zeros(n)
    has_tail = tail_len > 0
    t = tail_len[has_tail]
    log_geo = log_tail[p[has_tail]] / t
    log_arith = np.log(sum_tail[p[has_tail]] / t)
    fit[has_tail] = (p[has_tail] - n) * (log_geo - log_arith)
    penalty = 0.5 * p * (2 * n - p) * math.log(m) / m
    return fit + penalty


def mdl_criterion(eigenvalues, p: int, m: int) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if not 1 <= p <= lam.size:
        raise ValueError(f"p must satisfy 1 <= p <= {lam.size}")
    return float(mdl_curve(lam, m)[p - 1])


def select_order_mdl(s: SpectralSummary | np.ndarray, m: int) -> OrderEstimate:
    """Order minimizing the MDL curve; ties go to the smallest ``p``."""
    lam = s.eigenvalues if isinstance(s, SpectralSummary) else np.asarray(s, dtype=float)
    curve = mdl_curve(lam, m)
    k_star = int(np.argmin(curve)) + 1
    return OrderEstimate(k_star, curve, "mdl", {"m": int(m), "clampRtol": CLAMP_RTOL})


def select_order_threshold(s: SpectralSummary | np.ndarray, c: FilterConstants) -> OrderEstimate:
    """Count eigenvalues strictly above the midpoint of the population ``lambda_(2)`` and ``lambda_(3)``.

    Needs the population constants, so it serves as a reference baseline only.
    """
    if not c.assumption_holds():
        raise AssumptionViolatedError(f"threshold baseline needs c3 > c1 > c2 >= 0, got {c}")
    lam = s.eigenvalues if isinstance(s, SpectralSummary) else np.asarray(s, dtype=float)
    _, lam2, lam3 = analytic_spectrum(c).values
    threshold = 0.5 * (lam2 + lam3)
    above = lam > threshold
    k_star = int(above.sum())
    meta = {"threshold": threshold}
    if k_star == 0:
        meta["degenerate"] = True
    return OrderEstimate(k_star, lam - threshold, "naiveThreshold", meta)
