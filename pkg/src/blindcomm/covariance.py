"""Sample covariance of signal batches and its ordered eigendecomposition."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError

# Rows per chunk in deterministic accumulation.
DETERMINISTIC_CHUNK = 256


@dataclass
class SignalBatch:
    """``m`` observed signals of dimension ``n``, stored row-wise as an ``(m, n)`` array."""

    signals: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        y = np.asarray(self.signals, dtype=float)
        if y.ndim == 1:
            y = y[None, :]
        if y.ndim != 2:
            raise ValueError("signals must be a 2-D array (m, n)")
        self.signals = y

    @property
    def m(self) -> int:
        return self.signals.shape[0]

    @property
    def n(self) -> int:
        return self.signals.shape[1]

    def head(self, m: int) -> SignalBatch:
        return SignalBatch(self.signals[:m], dict(self.meta, m=m))

    def permute_nodes(self, perm) -> SignalBatch:
        return SignalBatch(self.signals[:, np.asarray(perm)], dict(self.meta))


def sample_covariance(batch: SignalBatch, center: bool = False, deterministic: bool = False):
    """``(1/m) sum_l y_l y_l^T``, symmetrized.

    No mean is removed unless ``center`` is set. With ``deterministic`` the
    outer products are accumulated serially over fixed row chunks with a
    non-BLAS kernel, so the result does not depend on thread count.
    """
    y = batch.signals
    if y.shape[0] == 0:
        raise DegenerateDataError("empty signal batch")
    if center:
        y = y - y.mean(axis=0)
    m = y.shape[0]
    if deterministic:
        c = np.zeros((y.shape[1], y.shape[1]))
        for start in range(0, m, DETERMINISTIC_CHUNK):
            chunk = y[start:start + DETERMINISTIC_CHUNK]
            c += np.einsum("li,lj->ij", chunk, chunk, optimize=False)
    else:
        c = y.T @ y
    c /= m
    return 0.5 * (c + c.T)


@dataclass
class SpectralSummary:
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def to_json(self, include_vectors: bool = False) -> dict:
        out = {"eigenvalues": self.eigenvalues.tolist()}
        if include_vectors:
            out["eigenvectors"] = self.eigenvectors.tolist()
        return out


def _canonical_signs(vecs: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    # Flip each column so its first entry with |v| > tol is positive.
    nonzero = np.abs(vecs) > tol
    first = np.argmax(nonzero, axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigendecompose(c) -> SpectralSummary:
    """Full symmetric eigendecomposition with eigenvalues in descending order.

    Ties keep the solver's order (stable sort); eigenvector signs are fixed so
    that the first nonzero entry of every column is positive.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("covariance must be square")
    if not np.all(np.isfinite(c)):
        raise DegenerateDataError("covariance has non-finite entries")
    vals, vecs = np.linalg.eigh(c)
    order = np.argsort(-vals, kind="stable")
    return SpectralSummary(c, vals[order], _canonical_signs(vecs[:, order]))


def top_k_eigenvectors(s: SpectralSummary, k: int) -> np.ndarray:
    if not 1 <= k <= s.n:
        raise ValueError(f"k must satisfy 1 <= k <= {s.n}, got {k}")
    return s.eigenvectors[:, :k]


def spectral_summary(batch: SignalBatch, center=False, deterministic=False) -> SpectralSummary:
    return eigendecompose(sample_covariance(batch, center=center, deterministic=deterministic))


def read_signal_csv(path) -> SignalBatch:
    """One signal per row, ``n`` columns; a non-numeric first row is taken as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DegenerateDataError(f"{path}: no rows")
    header = None
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        header, rows = rows[0], rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DegenerateDataError(f"{path}: unparseable cell ({exc})") from exc
    if data.ndim != 2 or data.shape[0] == 0:
        raise DegenerateDataError(f"{path}: ragged or empty signal table")
    meta = {"source": str(path)}
    if header is not None:
        meta["columns"] = header
    return SignalBatch(data, meta)


def write_signal_csv(batch: SignalBatch, path, header=None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in batch.signals:
            writer.writerow([repr(float(x)) for x in row])


def write_spectral_json(s: SpectralSummary, path, include_vectors=False) -> None:
    Path(path).write_text(json.dumps(s.to_json(include_vectors)))
