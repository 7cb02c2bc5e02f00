"""Continuously evaluable basis functions from discrete eigenvectors.

Each eigenvector is promoted to the unique degree-(N_s - 1) polynomial
through its samples, evaluated in barycentric Lagrange form. Derivatives
come from the differentiation matrix of the node set applied to the
samples, then interpolated the same way; expanding the interpolant into
monomial coefficients would be numerically toxic at these degrees while
representing the very same polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import csvio
from .klcore import TruncatedBasis

__all__ = [
    "BasisFunction",
    "barycentric_weights",
    "differentiation_matrix",
    "basis_function",
    "interpolate",
    "tabulate_csv_text",
]


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric weights w_j = 1 / prod_{k != j} (x_j - x_k), with the
    differences rescaled by 4/(b - a) so the products stay in range for
    larger node counts."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    scale = 4.0 / (nodes[-1] - nodes[0])
    w = np.ones(n)
    for j in range(n):
        diffs = (nodes[j] - nodes) * scale
        diffs[j] = 1.0
        w[j] = 1.0 / np.prod(diffs)
    return w


def differentiation_matrix(nodes: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """First-derivative collocation matrix of the node set:
    D[i, j] = (w_j / w_i) / (x_i - x_j) off the diagonal, and each
    diagonal entry is the negated row sum, which keeps constants exactly
    in the null space."""
    nodes = np.asarray(nodes, dtype=float)
    if weights is None:
        weights = barycentric_weights(nodes)
    n = nodes.size
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _bary_eval(nodes, weights, samples, x):
    """Evaluate the barycentric interpolant at x (scalar or array);
    returns the stored sample exactly when x hits a node."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < nodes[0]) or np.any(xa > nodes[-1]):
        raise ValueError(
            f"evaluation point outside [{nodes[0]}, {nodes[-1]}]; no extrapolation"
        )
    diff = xa[:, None] - nodes[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = weights[None, :] / diff
        out = (ratio @ samples) / ratio.sum(axis=1)
    rows, cols = np.nonzero(hit)
    out[rows] = samples[cols]
    return out if np.ndim(x) else float(out[0])


@dataclass(frozen=True)
class BasisFunction:
    """One interpolated mode: samples on the nodes plus precomputed
    derivative samples. Immutable after construction."""

    nodes: np.ndarray
    samples: np.ndarray
    mode_index: int = 0
    representation: str = "barycentric-lagrange"
    _weights: np.ndarray | None = field(repr=False, default=None)
    _deriv1: np.ndarray | None = field(repr=False, default=None)
    _deriv2: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "samples", samples)
        if nodes.size != samples.size:
            raise ValueError("nodes and samples must have equal length")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("interpolation nodes must be distinct")
        if self._weights is None:
            object.__setattr__(self, "_weights", barycentric_weights(nodes))
        if self._deriv1 is None or self._deriv2 is None:
            D = differentiation_matrix(nodes, self._weights)
            object.__setattr__(self, "_deriv1", D @ samples)
            object.__setattr__(self, "_deriv2", D @ (D @ samples))

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    def eval(self, x):
        return _bary_eval(self.nodes, self._weights, self.samples, x)

    __call__ = eval

    def deriv(self, x, order: int = 1):
        if order == 1:
            d = self._deriv1
        elif order == 2:
            d = self._deriv2
        else:
            raise ValueError(f"derivative order must be 1 or 2, got {order}")
        return _bary_eval(self.nodes, self._weights, d, x)


def basis_function(
    nodes,
    samples,
    mode_index: int = 0,
    D: np.ndarray | None = None,
    weights: np.ndarray | None = None,
) -> BasisFunction:
    """Build one BasisFunction; pass the differentiation matrix and
    weights to share them across modes on the same node set."""
    samples = np.asarray(samples, dtype=float)
    if weights is not None and D is not None:
        d1 = D @ samples
        d2 = D @ d1
    else:
        d1 = d2 = None
    return BasisFunction(
        nodes=nodes,
        samples=samples,
        mode_index=mode_index,
        _weights=weights,
        _deriv1=d1,
        _deriv2=d2,
    )


def interpolate(basis: TruncatedBasis) -> list[BasisFunction]:
    """One continuously evaluable function per retained mode."""
    if basis.grid is None:
        raise ValueError("truncated basis carries no grid to interpolate on")
    nodes = basis.grid.points
    weights = barycentric_weights(nodes)
    D = differentiation_matrix(nodes, weights)
    return [
        basis_function(nodes, basis.vectors[:, j], mode_index=j, D=D, weights=weights)
        for j in range(basis.M)
    ]


def tabulate_csv_text(funcs: list[BasisFunction], xs) -> str:
    """Dense tabulation (x, phi_0(x), ..., phi_{M-1}(x)) as CSV."""
    xs = np.asarray(xs, dtype=float)
    cols = [f.eval(xs) for f in funcs]
    header = ["x"] + [f"phi_{f.mode_index}" for f in funcs]
    rows = ([xs[i]] + [c[i] for c in cols] for i in range(xs.size))
    return csvio.csv_text(header, rows)
