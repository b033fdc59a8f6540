"""Polynomial graph filters ``H(S) = sum_l h_l S^l``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import ConfigError
from .graph_model import Graph

SHIFT_KINDS = ("adjacency", "laplacian")

# Diffusion step size: beta = 1 / ((4 + 4 gamma) * ln n).
DIFFUSION_BETA_SCALE = 4.0


@dataclass(frozen=True)
class FilterSpec:
    """Filter taps ``h_0..h_T`` applied to the adjacency or Laplacian shift."""

    coefficients: tuple
    shift: str = "laplacian"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a filter needs at least one coefficient")
        if self.shift not in SHIFT_KINDS:
            raise ValueError(f"shift must be one of {SHIFT_KINDS}, got {self.shift!r}")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, g: Graph, w: np.ndarray) -> np.ndarray:
        return apply_filter(self, g, w)

    def to_json(self) -> dict:
        return {"shift": self.shift, "coeffs": list(self.coefficients)}

    @classmethod
    def from_json(cls, obj: dict, gamma: float | None = None, n: int | None = None) -> FilterSpec:
        """Parse ``{"shift", "coeffs"}`` or ``{"preset": "diffusion", "gamma", "order"}``.

        For the diffusion preset ``gamma`` and ``n`` fall back to the keyword
        arguments (usually taken from the model config) when absent.
        """
        if not isinstance(obj, dict):
            raise ConfigError("filter config must be a JSON object")
        if "preset" in obj:
            if obj["preset"] != "diffusion":
                raise ConfigError(f"unknown filter preset {obj['preset']!r}")
            g = obj.get("gamma", gamma)
            nn = obj.get("n", n)
            if g is None or nn is None:
                raise ConfigError("diffusion preset needs gamma and n")
            return diffusion_filter(float(g), int(nn), int(obj.get("order", 5)), obj.get("beta"))
        try:
            return cls(tuple(obj["coeffs"]), obj.get("shift", "laplacian"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad filter config: {exc}") from exc


def apply_filter(spec: FilterSpec, g: Graph, w: np.ndarray) -> np.ndarray:
    """``H(S) w`` via Horner's rule on shift-vector products.

    ``w`` may be a single signal ``(n,)`` or a stack of signals ``(n, b)`` on
    the same graph. S^l is never formed.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[0] != g.n:
        raise ValueError(f"signal length {w.shape[0]} does not match graph size {g.n}")
    h = spec.coefficients
    out = h[-1] * w
    for coeff in reversed(h[:-1]):
        out = g.shift_product(spec.shift, out)
        out += coeff * w
    return out


def filter_matrix(spec: FilterSpec, g: Graph) -> np.ndarray:
    """Dense ``H(S)``; for small graphs and oracles only."""
    return apply_filter(spec, g, np.eye(g.n))


def generating_polynomial(spec: FilterSpec, lam):
    """``h(lambda) = sum_l h_l lambda^l`` by Horner evaluation."""
    out = 0.0
    for coeff in reversed(spec.coefficients):
        out = out * lam + coeff
    return out


def diffusion_beta(gamma: float, n: int) -> float:
    return 1.0 / (DIFFUSION_BETA_SCALE * (1.0 + gamma) * math.log(n))


def diffusion_filter(gamma: float, n: int, order: int = 5, beta: float | None = None) -> FilterSpec:
    """Laplacian diffusion ``(I - beta L)^T`` expanded into polynomial taps.

    ``beta`` defaults to ``1 / ((4 + 4 gamma) ln n)``.
    """
    if n < 2:
        raise ValueError("diffusion filter needs n >= 2")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if order < 0:
        raise ValueError("order must be nonnegative")
    if beta is None:
        beta = diffusion_beta(gamma, n)
    coeffs = [comb(order, l, exact=True) * (-beta) ** l for l in range(order + 1)]
    return FilterSpec(tuple(coeffs), "laplacian")
