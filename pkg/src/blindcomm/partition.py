"""Spectral partition recovery: k-means on the rows of the top-k eigenvectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariance import SpectralSummary, top_k_eigenvectors
from .errors import AssumptionViolatedError, DegenerateDataError
from .graph_model import PartitionIndicator
from .rng import as_generator
from .theory import FilterConstants, analytic_spectrum


@dataclass(frozen=True)
class KMeansConfig:
    restarts: int = 20
    max_iterations: int = 300
    tolerance: float = 1e-9
    normalize_rows: bool = False

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    def to_json(self) -> dict:
        return {"restarts": self.restarts, "maxIterations": self.max_iterations,
                "tolerance": self.tolerance, "normalizeRows": self.normalize_rows,
                "initialization": "kmeans++"}

    @classmethod
    def from_json(cls, obj: dict | None) -> KMeansConfig:
        obj = obj or {}
        return cls(restarts=int(obj.get("restarts", 20)),
                   max_iterations=int(obj.get("maxIterations", 300)),
                   tolerance=float(obj.get("tolerance", 1e-9)),
                   normalize_rows=bool(obj.get("normalizeRows", False)))


@dataclass
class Labeling:
    """Group id per node (0-based) and the group count ``k``."""

    assignments: np.ndarray
    k: int
    cost: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignments must be one-dimensional")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError(f"assignments must lie in 0..{self.k - 1}")
        self.assignments = a

    @property
    def n(self) -> int:
        return self.assignments.size

    def indicator(self) -> PartitionIndicator:
        return PartitionIndicator(self.assignments, self.k)

    def to_json(self) -> dict:
        out = {"assignments": self.assignments.tolist(), "k": int(self.k)}
        if self.cost is not None:
            out["cost"] = float(self.cost)
        return out


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (x * x).sum(1)[:, None] - 2 * x @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _seed_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # Distance-weighted seeding: each new center is a point sampled with
    # probability proportional to its squared distance to the nearest center.
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dists(x, centers[:1])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[c] = x[idx]
        closest = np.minimum(closest, _sq_dists(x, centers[c:c + 1])[:, 0])
    return centers


def _lloyd(x, centers, cfg: KMeansConfig):
    k = centers.shape[0]
    for _ in range(cfg.max_iterations):
        dist = _sq_dists(x, centers)
        labels = np.argmin(dist, axis=1)  # ties go to the lowest cluster index
        counts = np.bincount(labels, minlength=k)
        new = np.zeros_like(centers)
        np.add.at(new, labels, x)
        for c in np.flatnonzero(counts == 0):
            # Re-seed an empty cluster at the point farthest from its center.
            far = int(np.argmax(dist[np.arange(x.shape[0]), labels]))
            labels[far] = c
            counts = np.bincount(labels, minlength=k)
            new = np.zeros_like(centers)
            np.add.at(new, labels, x)
        new /= np.maximum(counts, 1)[:, None]
        shift = np.max(np.abs(new - centers))
        centers = new
        if shift <= cfg.tolerance:
            break
    dist = _sq_dists(x, centers)
    labels = np.argmin(dist, axis=1)
    return labels, centers


def kmeans(x, k: int, cfg: KMeansConfig | None = None, rng=None):
    """Best-of-restarts Lloyd k-means with distance-weighted seeding.

    Returns ``(labels, inertia)``. The winner is the restart with the lowest
    within-cluster sum of squares, the earliest restart on ties.
    """
    cfg = cfg or KMeansConfig()
    rng = as_generator(rng)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}")
    best_labels, best_cost = None, np.inf
    for _ in range(cfg.restarts):
        labels, centers = _lloyd(x, _seed_centers(x, k, rng), cfg)
        if np.bincount(labels, minlength=k).min() == 0:
            continue
        cost = float(((x - centers[labels]) ** 2).sum())
        if cost < best_cost:
            best_labels, best_cost = labels, cost
    if best_labels is None:
        raise DegenerateDataError(f"k-means left a cluster empty in all {cfg.restarts} restarts")
    return best_labels, best_cost


def recover_partition(s: SpectralSummary, k: int, cfg: KMeansConfig | None = None, rng=None) -> Labeling:
    """Cluster the rows of the top-``k`` eigenvector matrix into ``k`` groups."""
    cfg = cfg or KMeansConfig()
    vk = top_k_eigenvectors(s, k)
    emb = vk
    if cfg.normalize_rows:
        norms = np.linalg.norm(vk, axis=1, keepdims=True)
        emb = vk / np.where(norms > 0, norms, 1.0)
    labels, inertia = kmeans(emb, k, cfg, rng)
    labeling = Labeling(labels, k, meta={"inertia": inertia, "kmeans": cfg.to_json()})
    labeling.cost = kmeans_cost(labeling, vk)
    return labeling


def kmeans_cost(g: Labeling | PartitionIndicator, vk) -> float:
    """``||(I - G~ G~^T) V_k||_F^2`` where ``G~`` is the normalized indicator of ``g``."""
    ind = g.indicator() if isinstance(g, Labeling) else g
    vk = np.asarray(vk, dtype=float)
    if vk.shape[0] != ind.n:
        raise ValueError("embedding rows do not match the labeling")
    sizes = ind.sizes
    if np.any(sizes == 0):
        raise DegenerateDataError("a group is empty; the normalized indicator is undefined")
    # Projecting onto the group indicators replaces each row by its group mean.
    means = np.zeros((ind.k, vk.shape[1]))
    np.add.at(means, ind.labels, vk)
    means /= sizes[:, None]
    resid = vk - means[ind.labels]
    return float((resid * resid).sum())


def misclustering_bound(s: SpectralSummary | None, c: FilterConstants, spec_norm_error: float) -> float:
    """``(4k / nu^2) * err^2`` with ``nu = lambda_(2) - lambda_(3) - err``.

    ``s`` is accepted for interface symmetry with the recovered spectrum and is
    not needed for the value.
    """
    _, lam2, lam3 = analytic_spectrum(c).values
    nu = lam2 - lam3 - spec_norm_error
    if nu <= 0:
        raise AssumptionViolatedError(f"eigen-gap condition fails: nu = {nu}")
    return 4 * c.k / nu**2 * spec_norm_error**2
