"""Excitation signals ``w`` fed into the graph filter.

White kinds draw i.i.d. entries. Colored kinds (``diagonal``, ``wishart``,
``adversarial``) fix a coloring once when the source is prepared and reuse it
for every draw, so one experiment sees one excitation covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateDataError
from .rng import as_generator

KINDS = ("whiteUniform", "whiteGaussian", "diagonal", "wishart", "adversarial")

# Adversarial covariance 0.01 V1 V1^T + 0.81 V2 V2^T, i.e. standard deviations 0.1 and 0.9.
ADVERSARIAL_TOP_STD = 0.1
ADVERSARIAL_BOTTOM_STD = 0.9


@dataclass(frozen=True)
class ExcitationSpec:
    kind: str = "whiteGaussian"
    p: int | None = None
    unit_variance: bool = False
    raw_wishart: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"excitation kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "wishart" and (self.p is None or self.p < 1):
            raise ValueError("wishart excitation needs p >= 1")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "unitVariance": self.unit_variance}
        if self.p is not None:
            out["p"] = self.p
        if self.raw_wishart:
            out["rawWishart"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> ExcitationSpec:
        try:
            return cls(
                kind=obj.get("kind", "whiteGaussian"),
                p=obj.get("p"),
                unit_variance=bool(obj.get("unitVariance", False)),
                raw_wishart=bool(obj.get("rawWishart", False)),
            )
        except (AttributeError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad excitation config: {exc}") from exc


class ExcitationSource:
    """A prepared excitation: coloring fixed, draws pure given an RNG stream."""

    def __init__(self, spec: ExcitationSpec, n: int, rng=None, expected_adjacency=None, k=None):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.spec = spec
        self.n = n
        self.scale = None       # diagonal: per-node std
        self.factor = None      # wishart: n x p, W = factor @ factor.T
        self.top = None         # adversarial: n x k top eigenvectors
        rng = as_generator(rng)
        if spec.kind == "diagonal":
            self.scale = np.sqrt(rng.uniform(0.0, 1.0, size=n))
        elif spec.kind == "wishart":
            z = rng.standard_normal((n, spec.p))
            self.factor = z if spec.raw_wishart else z / np.sqrt(spec.p)
        elif spec.kind == "adversarial":
            if expected_adjacency is None or k is None:
                raise ValueError("adversarial excitation needs expected_adjacency and k")
            self.top = adversarial_basis(expected_adjacency, k)

    def covariance(self) -> np.ndarray:
        """Population covariance of one draw."""
        n, kind = self.n, self.spec.kind
        if kind == "whiteUniform":
            return np.eye(n) * (1.0 if self.spec.unit_variance else 1.0 / 3.0)
        if kind == "whiteGaussian":
            return np.eye(n)
        if kind == "diagonal":
            return np.diag(self.scale**2)
        if kind == "wishart":
            return self.factor @ self.factor.T
        proj = self.top @ self.top.T
        return ADVERSARIAL_TOP_STD**2 * proj + ADVERSARIAL_BOTTOM_STD**2 * (np.eye(n) - proj)

    def draw(self, rng, size: int | None = None) -> np.ndarray:
        """One draw of shape ``(n,)`` or ``size`` draws stacked as ``(n, size)``."""
        rng = as_generator(rng)
        cols = 1 if size is None else size
        n, kind = self.n, self.spec.kind
        if kind == "whiteUniform":
            w = rng.uniform(-1.0, 1.0, size=(n, cols))
            if self.spec.unit_variance:
                w *= np.sqrt(3.0)
        elif kind == "whiteGaussian":
            w = rng.standard_normal((n, cols))
        elif kind == "diagonal":
            w = self.scale[:, None] * rng.standard_normal((n, cols))
        elif kind == "wishart":
            w = self.factor @ rng.standard_normal((self.factor.shape[1], cols))
        else:
            z = rng.standard_normal((n, cols))
            # (0.9 I - 0.8 P) has square 0.01 P + 0.81 (I - P) for the projector P.
            w = ADVERSARIAL_BOTTOM_STD * z - (ADVERSARIAL_BOTTOM_STD - ADVERSARIAL_TOP_STD) * (
                self.top @ (self.top.T @ z)
            )
        return w[:, 0] if size is None else w


def adversarial_basis(expected_adjacency, k: int) -> np.ndarray:
    """Top-``k`` eigenvectors of a symmetric expected adjacency.

    Raises DegenerateDataError when the k-th and (k+1)-th eigenvalues coincide,
    since the top subspace is then not determined.
    """
    ea = np.asarray(expected_adjacency, dtype=float)
    n = ea.shape[0]
    if ea.shape != (n, n) or not np.allclose(ea, ea.T):
        raise ValueError("expected adjacency must be a symmetric square matrix")
    if not 1 <= k < n:
        raise ValueError(f"cut index k must satisfy 1 <= k < n, got {k}")
    try:
        vals, vecs = np.linalg.eigh(ea)
    except np.linalg.LinAlgError as exc:
        raise DegenerateDataError(f"eigendecomposition failed: {exc}") from exc
    vals, vecs = vals[::-1], vecs[:, ::-1]
    scale = max(abs(vals[0]), 1.0)
    if vals[k - 1] - vals[k] <= 1e-10 * scale:
        raise DegenerateDataError(
            f"no spectral gap after eigenvalue {k}: top-{k} subspace is not identifiable"
        )
    return vecs[:, :k]


def draw_excitation(spec: ExcitationSpec, n: int, rng=None, **kwargs) -> np.ndarray:
    """One-off draw. Colored kinds draw a fresh coloring from the same stream first."""
    rng = as_generator(rng)
    return ExcitationSource(spec, n, rng, **kwargs).draw(rng)


def excitation_variance(spec: ExcitationSpec) -> float | None:
    """Per-entry variance of white kinds; None for colored kinds."""
    if spec.kind == "whiteGaussian":
        return 1.0
    if spec.kind == "whiteUniform":
        return 1.0 if spec.unit_variance else 1.0 / 3.0
    return None
