"""Planted-partition and stochastic-block-model graphs.

Graphs are stored as undirected edge lists (``i < j``) plus an optional
self-loop mask. Dense adjacency and Laplacian matrices are built on demand;
the filter code only needs shift-vector products, which are computed from
the edge list in O(|E|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache, cached_property

import numpy as np
from scipy import sparse

from .errors import InvalidProbabilityError
from .rng import as_generator


@dataclass(frozen=True)
class PpmParams:
    """Planted partition model with ``k`` equal groups of ``n // k`` nodes.

    Edge probabilities are ``a / n`` within groups and ``b / n`` between groups.
    """

    n: int
    k: int
    a: float
    b: float

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError(f"n and k must be positive, got n={self.n}, k={self.k}")
        if self.k > self.n or self.n % self.k:
            raise ValueError(f"k={self.k} must divide n={self.n}")
        for name, val in (("a", self.a), ("b", self.b)):
            p = val / self.n
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise InvalidProbabilityError(f"{name}/n = {p} is not a probability")

    @classmethod
    def from_probabilities(cls, n, k, p_in, p_out):
        return cls(n=n, k=k, a=p_in * n, b=p_out * n)

    @property
    def p_in(self) -> float:
        return self.a / self.n

    @property
    def p_out(self) -> float:
        return self.b / self.n

    @property
    def gamma(self) -> float:
        """Ratio ``b / a`` (infinite when ``a == 0``)."""
        return self.b / self.a if self.a else math.inf

    @property
    def block_size(self) -> int:
        return self.n // self.k

    def affinity(self) -> np.ndarray:
        return ppm_affinity(self)

    def to_sbm(self) -> SbmParams:
        return SbmParams(group_sizes=(self.block_size,) * self.k, affinity=self.affinity())


@dataclass(frozen=True)
class SbmParams:
    """General SBM: group sizes and a symmetric ``k x k`` probability matrix."""

    group_sizes: tuple
    affinity: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        if not sizes or min(sizes) < 1:
            raise ValueError("group sizes must be positive")
        omega = np.asarray(self.affinity, dtype=float)
        if omega.shape != (len(sizes), len(sizes)):
            raise ValueError(f"affinity shape {omega.shape} does not match {len(sizes)} groups")
        if not np.array_equal(omega, omega.T):
            raise ValueError("affinity must be symmetric")
        if np.any(omega < 0) or np.any(omega > 1) or np.any(np.isnan(omega)):
            raise InvalidProbabilityError("affinity entries must lie in [0, 1]")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "affinity", omega)

    @property
    def n(self) -> int:
        return sum(self.group_sizes)

    @property
    def k(self) -> int:
        return len(self.group_sizes)


def balanced_sbm(n: int, k: int, a: float, b: float) -> SbmParams:
    """PPM-style affinity on ``k`` groups whose sizes differ by at most one.

    For ``n`` not divisible by ``k``; the first ``n % k`` groups get the extra node.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    base, extra = divmod(n, k)
    sizes = tuple(base + (1 if r < extra else 0) for r in range(k))
    return SbmParams(sizes, _two_level(k, a / n, b / n))


def ppm_affinity(params: PpmParams) -> np.ndarray:
    """``(a/n) I_k + (b/n) (1 1^T - I_k)``."""
    return _two_level(params.k, params.p_in, params.p_out)


def _two_level(k: int, p_in: float, p_out: float) -> np.ndarray:
    return np.where(np.eye(k, dtype=bool), p_in, p_out)


@dataclass(frozen=True)
class PartitionIndicator:
    """Node-to-group membership. ``labels[i]`` is the 0-based group of node ``i``."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels must lie in 0..{self.k - 1}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def contiguous(cls, group_sizes) -> PartitionIndicator:
        """Nodes ``0..s_0-1`` in group 0, the next ``s_1`` in group 1, and so on."""
        sizes = [int(s) for s in group_sizes]
        return cls(np.repeat(np.arange(len(sizes)), sizes), len(sizes))

    @classmethod
    def equal(cls, n: int, k: int) -> PartitionIndicator:
        return cls.contiguous([n // k] * k)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @property
    def matrix(self) -> np.ndarray:
        """Binary ``n x k`` indicator matrix G."""
        g = np.zeros((self.n, self.k))
        g[np.arange(self.n), self.labels] = 1.0
        return g

    @property
    def normalized(self) -> np.ndarray:
        """``G (G^T G)^{-1/2}``; columns are orthonormal. Undefined for empty groups."""
        sizes = self.sizes
        if np.any(sizes == 0):
            raise ValueError("normalized indicator undefined: a group is empty")
        return self.matrix / np.sqrt(sizes)

    def permuted(self, perm: np.ndarray) -> PartitionIndicator:
        """Labels after relabelling nodes so that new node ``i`` is old node ``perm[i]``."""
        return PartitionIndicator(self.labels[np.asarray(perm)], self.k)


@lru_cache(maxsize=64)
def _triu_pairs(s: int):
    rows, cols = np.triu_indices(s, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected unweighted graph on ``n`` nodes.

    ``rows[e] < cols[e]`` lists every edge once; ``loops`` marks nodes with a
    unit self-loop (``A_ii = 1``).
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    loops: np.ndarray = field(default=None)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have the same length")
        if rows.size and (np.any(rows >= cols) or rows.min() < 0 or cols.max() >= self.n):
            raise ValueError("edges must satisfy 0 <= i < j < n")
        loops = np.zeros(self.n, dtype=bool) if self.loops is None else np.asarray(self.loops, bool)
        if loops.shape != (self.n,):
            raise ValueError("loops must have length n")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "loops", loops)

    @classmethod
    def from_adjacency(cls, adjacency) -> Graph:
        a = np.asarray(adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        rows, cols = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], rows, cols, np.diag(a) != 0)

    @property
    def num_edges(self) -> int:
        return self.rows.size

    @cached_property
    def degrees(self) -> np.ndarray:
        """Row sums of A (a self-loop adds one)."""
        deg = np.bincount(self.rows, minlength=self.n) + np.bincount(self.cols, minlength=self.n)
        return deg + self.loops

    @property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.rows, self.cols] = 1.0
        a[self.cols, self.rows] = 1.0
        a[np.diag_indices(self.n)] = self.loops
        return a

    @property
    def laplacian(self) -> np.ndarray:
        return laplacian(self)

    def shift_matrix(self, kind: str) -> np.ndarray:
        if kind == "adjacency":
            return self.adjacency
        if kind == "laplacian":
            return self.laplacian
        raise ValueError(f"unknown shift operator {kind!r}")

    @cached_property
    def sparse_adjacency(self):
        rows = np.concatenate([self.rows, self.cols, np.flatnonzero(self.loops)])
        cols = np.concatenate([self.cols, self.rows, np.flatnonzero(self.loops)])
        data = np.ones(rows.size)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def adjacency_product(self, x: np.ndarray) -> np.ndarray:
        """``A @ x`` for ``x`` of shape ``(n,)`` or ``(n, b)``."""
        if x.ndim > 1:
            return np.asarray(self.sparse_adjacency @ x)
        out = np.bincount(self.rows, weights=x[self.cols], minlength=self.n)
        out += np.bincount(self.cols, weights=x[self.rows], minlength=self.n)
        if self.loops.any():
            out[self.loops] += x[self.loops]
        return out

    def shift_product(self, kind: str, x: np.ndarray) -> np.ndarray:
        """``S @ x`` without forming S."""
        ax = self.adjacency_product(x)
        if kind == "adjacency":
            return ax
        if kind == "laplacian":
            deg = self.degrees if x.ndim == 1 else self.degrees[:, None]
            return deg * x - ax
        raise ValueError(f"unknown shift operator {kind!r}")

    def same_as(self, other: Graph) -> bool:
        """Same node count, edge set and self-loops (edge order ignored)."""
        if self.n != other.n or self.num_edges != other.num_edges:
            return False
        mine = np.sort(self.rows * self.n + self.cols)
        theirs = np.sort(other.rows * other.n + other.cols)
        return bool(np.array_equal(mine, theirs) and np.array_equal(self.loops, other.loops))

    def to_edge_list(self) -> str:
        """One ``"i j"`` line per undirected edge, 0-indexed; self-loops as ``"i i"``."""
        pairs = [(int(i), int(i)) for i in np.flatnonzero(self.loops)]
        pairs += list(zip(self.rows.tolist(), self.cols.tolist()))
        pairs.sort()
        return "".join(f"{i} {j}\n" for i, j in pairs)

    @classmethod
    def from_edge_list(cls, text: str, n: int) -> Graph:
        rows, cols, loops = [], [], np.zeros(n, dtype=bool)
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, j = (int(t) for t in line.split())
            if i == j:
                loops[i] = True
            else:
                rows.append(min(i, j))
                cols.append(max(i, j))
        order = np.lexsort((cols, rows)) if rows else np.array([], dtype=np.int64)
        return cls(n, np.asarray(rows, np.int64)[order], np.asarray(cols, np.int64)[order], loops)


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``diag(A 1) - A``."""
    a = g.adjacency
    return np.diag(a.sum(axis=1)) - a


def _bernoulli_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of successes among ``total`` independent Ber(p) trials.

    Gaps between successes are geometric, so the cost is O(number of successes).
    """
    if total == 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunks = []
    last = -1
    expected = total * p
    while True:
        size = int(expected + 4 * math.sqrt(expected) + 16)
        pos = last + np.cumsum(rng.geometric(p, size=size))
        if pos[-1] >= total:
            chunks.append(pos[pos < total])
            break
        chunks.append(pos)
        last = int(pos[-1])
        expected = (total - last) * p
    return np.concatenate(chunks)


def _model_affinity(params, labels: PartitionIndicator) -> np.ndarray:
    omega = ppm_affinity(params) if isinstance(params, PpmParams) else params.affinity
    k = omega.shape[0]
    if labels.k != k:
        raise ValueError(f"labels have {labels.k} groups but the model has {k}")
    if isinstance(params, SbmParams) and not np.array_equal(labels.sizes, params.group_sizes):
        raise ValueError("label group sizes do not match the model")
    if isinstance(params, PpmParams) and labels.n != params.n:
        raise ValueError("label count does not match n")
    return omega


def sample_graphs(params, labels: PartitionIndicator, count: int, rng=None,
                  self_loops: bool = False) -> Graph:
    """Draw ``count`` independent graphs as one disjoint union.

    Node ``i`` of graph ``b`` is node ``b * n + i`` of the returned graph.
    Use :func:`split_union` to recover the individual graphs.
    """
    rng = as_generator(rng)
    omega = _model_affinity(params, labels)
    k = omega.shape[0]
    n = labels.n
    members = [np.flatnonzero(labels.labels == r) for r in range(k)]
    rows, cols = [], []
    for r in range(k):
        mr = members[r]
        tri_r, tri_c = _triu_pairs(mr.size)
        pos = _bernoulli_positions(count * tri_r.size, omega[r, r], rng)
        if pos.size:
            b, idx = np.divmod(pos, tri_r.size)
            rows.append(b * n + mr[tri_r[idx]])
            cols.append(b * n + mr[tri_c[idx]])
        for s in range(r + 1, k):
            ms = members[s]
            pairs = mr.size * ms.size
            pos = _bernoulli_positions(count * pairs, omega[r, s], rng)
            if pos.size:
                b, idx = np.divmod(pos, pairs)
                i, j = mr[idx // ms.size], ms[idx % ms.size]
                rows.append(b * n + np.minimum(i, j))
                cols.append(b * n + np.maximum(i, j))
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    if self_loops:
        loops = rng.random(count * n) < np.tile(omega[labels.labels, labels.labels], count)
    else:
        loops = np.zeros(count * n, dtype=bool)
    return Graph(count * n, rows, cols, loops)


def split_union(union: Graph, n: int) -> list:
    """Split a disjoint union of equal-size graphs back into its parts."""
    count = union.n // n
    gid = union.rows // n
    order = np.argsort(gid, kind="stable")
    bounds = np.searchsorted(gid[order], np.arange(count + 1))
    out = []
    for b in range(count):
        sel = order[bounds[b]:bounds[b + 1]]
        out.append(Graph(n, union.rows[sel] - b * n, union.cols[sel] - b * n,
                         union.loops[b * n:(b + 1) * n]))
    return out


def sample_graph(params, labels: PartitionIndicator, rng=None, self_loops: bool = False) -> Graph:
    """Draw ``A_ij = A_ji ~ Ber(Omega[g_i, g_j])`` independently for ``i < j``.

    With ``self_loops`` the diagonal is drawn as ``A_ii ~ Ber(Omega[g_i, g_i])``,
    otherwise it is zero.
    """
    return sample_graphs(params, labels, 1, rng, self_loops)


def bernoulli_graph_sequence(params, labels, m: int, p: float, rng=None, self_loops=False):
    """Graph sequence where each step redraws from the model with probability ``p``.

    The first graph is always a fresh draw; afterwards the previous graph is kept
    with probability ``1 - p``. Returns ``(graphs, redraw_flags)`` where
    ``redraw_flags[l]`` is True when graph ``l`` was freshly drawn.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"redraw probability must lie in [0, 1], got {p}")
    if m < 1:
        raise ValueError("sequence length must be at least 1")
    rng = as_generator(rng)
    flags = np.ones(m, dtype=bool)
    flags[1:] = rng.random(m - 1) < p
    graphs = []
    for redraw in flags:
        if redraw:
            current = sample_graph(params, labels, rng, self_loops)
        graphs.append(current)
    return graphs, flags


def model_labels(params) -> PartitionIndicator:
    """Contiguous ground-truth labels for a PPM or SBM parameter set."""
    if isinstance(params, SbmParams):
        return PartitionIndicator.contiguous(params.group_sizes)
    return PartitionIndicator.equal(params.n, params.k)


def expected_adjacency(params, labels: PartitionIndicator) -> np.ndarray:
    """``G Omega G^T``."""
    omega = _model_affinity(params, labels)
    return omega[np.ix_(labels.labels, labels.labels)]
