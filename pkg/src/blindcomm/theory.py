"""Closed-form population quantities for filtered PPM signals.

Second-order filter moments ``E[H_il H_jl]`` take one of nine values p1..p9
depending on how the nodes i, j, l share groups. Three constants c1, c2, c3
built from them give the within-block, cross-block and diagonal entries of the
population covariance, whose spectrum has only three distinct values. The
functions here evaluate these objects exactly and also estimate them by
Monte Carlo, so the statistical code can be checked against them.

Moments for the adjacency filter take the raw edge probabilities
``p_in = a/n`` and ``p_out = b/n`` as arguments, with self-loops allowed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolatedError
from .graph_filter import FilterSpec, apply_filter
from .graph_model import PartitionIndicator, PpmParams, model_labels, sample_graph
from .rng import as_generator

MOMENT_NAMES = tuple(f"p{i}" for i in range(1, 10))


@dataclass(frozen=True)
class MomentParams:
    p1: float
    p2: float
    p3: float
    p4: float
    p5: float
    p6: float
    p7: float
    p8: float
    p9: float

    @classmethod
    def from_array(cls, values) -> MomentParams:
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in MOMENT_NAMES])


@dataclass(frozen=True)
class FilterConstants:
    """Constants c1 (within block), c2 (across blocks), c3 (diagonal) of the covariance."""

    c1: float
    c2: float
    c3: float
    n: int
    k: int

    @property
    def block_size(self) -> float:
        return self.n / self.k

    @property
    def rho(self) -> float:
        return (self.c1 - self.c2) / (self.k * (self.c3 - self.c1))

    def assumption_holds(self, rtol: float = 1e-12) -> bool:
        """``c3 > c1 > c2 >= 0``; gaps below ``rtol`` times the largest constant count as ties."""
        tol = rtol * max(abs(self.c1), abs(self.c2), abs(self.c3))
        return self.c3 - self.c1 > tol and self.c1 - self.c2 > tol and self.c2 >= -tol

    def scaled(self, factor: float) -> FilterConstants:
        return FilterConstants(self.c1 * factor, self.c2 * factor, self.c3 * factor, self.n, self.k)

    def to_json(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3, "n": self.n, "k": self.k}


def assumption_holds(c: FilterConstants) -> bool:
    return c.assumption_holds()


def constants_from_moments(p: MomentParams, n: int, k: int) -> FilterConstants:
    if n % k:
        raise ValueError(f"k={k} must divide n={n}")
    s = n / k
    c1 = 2 * p.p4 + (s - 2) * p.p6 + s * (k - 1) * p.p7
    c2 = 2 * p.p5 + 2 * (s - 1) * p.p8 + s * (k - 2) * p.p9
    c3 = p.p1 + (s - 1) * p.p2 + s * (k - 1) * p.p3
    return FilterConstants(c1, c2, c3, n, k)


def adjacency_moments(p_in: float, p_out: float) -> MomentParams:
    """Moments of ``H = A`` (self-loops allowed) under edge probabilities p_in, p_out."""
    for p in (p_in, p_out):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{p} is not a probability")
    a, b = p_in, p_out
    return MomentParams(a, a, b, a * a, a * b, a * a, b * b, a * b, b * b)


def adjacency_constants(params: PpmParams) -> FilterConstants:
    return constants_from_moments(adjacency_moments(params.p_in, params.p_out), params.n, params.k)


# --- Monte Carlo oracles -------------------------------------------------


def moment_classes(labels: PartitionIndicator) -> np.ndarray:
    """Class index 0..8 (for p1..p9) of every node triple ``(i, j, l)``.

    The nine classes partition all triples: i=j=l; i=j!=l (same/different
    group); i!=j with l in {i, j} (i, j same/different group); and i, j, l
    distinct, split by which pairs share a group.
    """
    g = labels.labels
    n = g.size
    idx = np.arange(n)
    i, j, l = np.meshgrid(idx, idx, idx, indexing="ij")
    gi, gj, gl = g[i], g[j], g[l]
    same_ij, same_il, same_jl = gi == gj, gi == gl, gj == gl
    eq_ij, eq_il, eq_jl = i == j, i == l, j == l
    cls = np.full((n, n, n), -1, dtype=np.int64)
    cls[eq_ij & eq_il] = 0
    diag_pair = eq_ij & ~eq_il
    cls[diag_pair & same_il] = 1
    cls[diag_pair & ~same_il] = 2
    touching = ~eq_ij & (eq_il | eq_jl)
    cls[touching & same_ij] = 3
    cls[touching & ~same_ij] = 4
    distinct = ~eq_ij & ~eq_il & ~eq_jl
    cls[distinct & same_ij & same_il] = 5
    cls[distinct & same_ij & ~same_il] = 6
    cls[distinct & ~same_ij & (same_il | same_jl)] = 7
    cls[distinct & ~same_ij & ~same_il & ~same_jl] = 8
    assert (cls >= 0).all()
    return cls


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo moments; unrealizable classes are NaN and flagged False."""

    mean: np.ndarray
    stderr: np.ndarray
    realizable: np.ndarray
    trials: int

    def moments(self) -> MomentParams:
        return MomentParams.from_array(np.where(self.realizable, self.mean, 0.0))


def _batch_shift(adj: np.ndarray, kind: str) -> np.ndarray:
    if kind == "adjacency":
        return adj
    deg = adj.sum(axis=2)
    lap = -adj.copy()
    idx = np.arange(adj.shape[1])
    lap[:, idx, idx] += deg
    return lap


def _batch_filter(spec: FilterSpec, shift: np.ndarray) -> np.ndarray:
    n = shift.shape[1]
    eye = np.eye(n)
    h = spec.coefficients
    out = np.broadcast_to(h[-1] * eye, shift.shape).copy()
    for coeff in reversed(h[:-1]):
        out = shift @ out
        out += coeff * eye
    return out


def monte_carlo_moments(spec: FilterSpec, params: PpmParams, trials: int, rng=None,
                        self_loops: bool = True, batch: int = 200, strict: bool = False):
    """Estimate p1..p9 by averaging ``H_il H_jl`` over every triple of each class.

    Each graph draw contributes one average per class; the estimate is the mean
    over draws with its standard error. Meant for small ``n`` (cost O(n^3) per draw).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = as_generator(rng)
    labels = PartitionIndicator.equal(params.n, params.k)
    cls = moment_classes(labels).ravel()
    counts = np.bincount(cls, minlength=9)
    realizable = counts > 0
    if strict and not realizable.all():
        missing = [MOMENT_NAMES[c] for c in np.flatnonzero(~realizable)]
        raise ValueError(f"n={params.n}, k={params.k} cannot realize {missing}")
    onehot = np.zeros((cls.size, 9))
    onehot[np.arange(cls.size), cls] = 1.0
    onehot /= np.maximum(counts, 1)

    n = params.n
    probs = params.affinity()[np.ix_(labels.labels, labels.labels)]
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    total = np.zeros(9)
    total_sq = np.zeros(9)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        draws = rng.random((b, n, n))
        adj = (draws < probs) & upper
        adj = adj | adj.transpose(0, 2, 1)
        if self_loops:
            diag = rng.random((b, n)) < np.diag(probs)
            adj[:, np.arange(n), np.arange(n)] = diag
        h = _batch_filter(spec, _batch_shift(adj.astype(float), spec.shift))
        prod = h[:, :, None, :] * h[:, None, :, :]
        per_draw = prod.reshape(b, -1) @ onehot
        total += per_draw.sum(axis=0)
        total_sq += (per_draw**2).sum(axis=0)
        done += b
    mean = total / trials
    var = np.maximum(total_sq / trials - mean**2, 0.0) * trials / max(trials - 1, 1)
    stderr = np.sqrt(var / trials)
    mean[~realizable] = np.nan
    stderr[~realizable] = np.nan
    return MomentEstimate(mean, stderr, realizable, trials)


def monte_carlo_constants(spec: FilterSpec, params, draws: int, rng=None,
                          self_loops: bool = False, variance: float = 1.0) -> FilterConstants:
    """Estimate c1, c2, c3 of ``variance * E[H H^T]`` from block sums of sampled filters.

    Works for any filter. Each draw contributes every diagonal, within-block and
    cross-block entry, so a few hundred draws pin the constants tightly. For an
    SBM with unequal groups the result is the entry average of each class, a
    PPM-equivalent summary rather than an exact description.
    """
    if draws < 1:
        raise ValueError("draws must be at least 1")
    rng = as_generator(rng)
    labels = model_labels(params)
    n, k = labels.n, labels.k
    sizes = labels.sizes
    within_pairs = float((sizes * (sizes - 1)).sum())
    cross_pairs = float(n * n - (sizes**2).sum())
    g = labels.matrix
    eye = np.eye(n)
    diag_sum = within_sum = cross_sum = 0.0
    for _ in range(draws):
        graph = sample_graph(params, labels, rng, self_loops)
        h = apply_filter(spec, graph, eye)
        row_sq = (h * h).sum(axis=1)
        blocks = g.T @ h
        gram = blocks @ blocks.T
        diag_sum += row_sq.sum()
        within_sum += np.trace(gram) - row_sq.sum()
        cross_sum += gram.sum() - np.trace(gram)
    c3 = diag_sum / (draws * n)
    c1 = within_sum / (draws * within_pairs) if within_pairs else 0.0
    c2 = cross_sum / (draws * cross_pairs) if cross_pairs else 0.0
    return FilterConstants(float(c1 * variance), float(c2 * variance), float(c3 * variance), n, k)


# --- population covariance and spectrum ----------------------------------


def analytic_covariance(c: FilterConstants, labels: PartitionIndicator) -> np.ndarray:
    """``(c3 - c1) I + G ((c1 - c2) I + c2 1 1^T) G^T``."""
    if labels.n != c.n or labels.k != c.k:
        raise ValueError("labels do not match the constants' (n, k)")
    g = labels.matrix
    inner = (c.c1 - c.c2) * np.eye(c.k) + c.c2
    return (c.c3 - c.c1) * np.eye(c.n) + g @ inner @ g.T


@dataclass(frozen=True)
class Spectrum:
    values: tuple
    multiplicities: tuple

    def full(self) -> np.ndarray:
        """All n eigenvalues in descending order."""
        return np.repeat(np.array(self.values, dtype=float), self.multiplicities)

    def distinct(self, rtol=1e-12) -> list:
        """``[(value, multiplicity)]`` with coincident values merged."""
        out = []
        for val, mult in sorted(zip(self.values, self.multiplicities), key=lambda t: -t[0]):
            if mult == 0:
                continue
            if out and abs(out[-1][0] - val) <= rtol * max(abs(val), 1.0):
                out[-1] = (out[-1][0], out[-1][1] + mult)
            else:
                out.append((val, mult))
        return out


def analytic_spectrum(c: FilterConstants) -> Spectrum:
    """Three eigenvalues of the population covariance with multiplicities 1, k-1, n-k."""
    if not c.assumption_holds():
        warnings.warn(f"constants violate c3 > c1 > c2 >= 0: {c}", RuntimeWarning, stacklevel=2)
    s = c.n / c.k
    lam3 = c.c3 - c.c1
    lam2 = lam3 + s * (c.c1 - c.c2)
    lam1 = lam2 + c.n * c.c2
    return Spectrum((lam1, lam2, lam3), (1, c.k - 1, c.n - c.k))


def sample_bounds(c: FilterConstants):
    """Relative sample-size difficulty ``(1/(c3-c1)^2, 1/(c1-c2)^2)``; no constants attached."""
    gap_order = c.c3 - c.c1
    gap_partition = c.c1 - c.c2
    if gap_order <= 0 or gap_partition <= 0:
        raise AssumptionViolatedError(
            f"spectral gaps must be positive: c3-c1={gap_order}, c1-c2={gap_partition}"
        )
    return 1.0 / gap_order**2, 1.0 / gap_partition**2


def mdl_penalty(p: int, n: int, m: int) -> float:
    return 0.5 * p * (2 * n - p) * math.log(m) / m


def mdl_of_true_spectrum(c: FilterConstants, p: int, m: int) -> float:
    """MDL criterion evaluated in closed form on the population spectrum."""
    n, k = c.n, c.k
    if not 1 <= p <= n:
        raise ValueError(f"p must satisfy 1 <= p <= {n}")
    value = mdl_penalty(p, n, m)
    if p >= k:
        return value
    spec = analytic_spectrum(c)
    lam2, lam3 = spec.values[1], spec.values[2]
    w2, w3 = (k - p) / (n - p), (n - k) / (n - p)
    log_geo = w2 * math.log(lam2) + w3 * math.log(lam3)
    log_arith = math.log(w2 * lam2 + w3 * lam3)
    return value - (n - p) * (log_geo - log_arith)


def mdl_underfit_margin(c: FilterConstants, m: int) -> float:
    """``MDL(k-1) - MDL(k)`` on the population spectrum written through rho."""
    n, k, rho = c.n, c.k, c.rho
    return ((n - k + 1) * math.log1p(n * rho / (n - k + 1)) - math.log1p(n * rho)
            - (n - k + 0.5) * math.log(m) / m)


def gamma_power_inequality_check(gamma: float, x: float) -> bool:
    """Whether ``gamma**x < 1 + x (gamma - 1)`` (strict; equality at x = 0)."""
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    return gamma**x < 1 + x * (gamma - 1)


def kmeans_cost_lower_bound(n: int, k: int) -> float:
    """Smallest k-means projection cost of any wrong labeling for equal blocks: 2/(n/k+1)."""
    if n % k or n // k < 2:
        raise ValueError("needs equal blocks of at least two nodes")
    return 2.0 / (n / k + 1)


def single_mislabel_cost(s_from: int, s_to: int) -> float:
    """Cost after moving one node out of a true block of size ``s_from`` into one of size ``s_to``.

    Written as ``(s1 + s2) / ((s1 + 1) s2)`` with ``s1 = s_to`` (the block that
    gains the node) and ``s2 = s_from``.
    """
    s1, s2 = s_to, s_from
    return (s1 + s2) / ((s1 + 1) * s2)


def gap_condition_threshold(c: FilterConstants) -> float:
    """Covariance error below which exact recovery follows from the cost bounds."""
    return (c.n / c.k) * (c.c1 - c.c2) / (1 + math.sqrt(2 * (c.n + c.k)))
