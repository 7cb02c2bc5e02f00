"""Collocation solver for the regularized radial boundary-value problem
in a truncated basis of interpolated modes.

The unknown is expanded as y(x) = sum_i c_i phi_i(x); the differential
equation is imposed at interior collocation points and the two boundary
values close the system.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .basisfn import BasisFunction
from .errors import NumericalError
from .hydrogenic import BoundaryValueProblem

__all__ = [
    "CollocationProblem",
    "AssembledSystem",
    "SpectralSolution",
    "EnergyScan",
    "default_collocation_points",
    "make_collocation_problem",
    "assemble",
    "solve",
    "residual",
    "relative_residual_norm",
    "energy_scan",
]

_SINGULAR_GATE = 1e-14
_BOUNDARY_WEIGHT = 1e6
_BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class CollocationProblem:
    """A boundary-value problem, the basis to expand in, and the interior
    points where the equation is imposed (the boundary rows are implied)."""

    bvp: BoundaryValueProblem
    basis: tuple[BasisFunction, ...]
    interior_points: np.ndarray

    def __post_init__(self):
        basis = tuple(self.basis)
        object.__setattr__(self, "basis", basis)
        pts = np.asarray(self.interior_points, dtype=float)
        object.__setattr__(self, "interior_points", pts)
        if not basis:
            raise ValueError("need at least one basis function")
        f0 = basis[0]
        if f0.a > self.bvp.a or f0.b < self.bvp.b:
            raise ValueError(
                f"basis domain [{f0.a}, {f0.b}] does not cover problem domain "
                f"[{self.bvp.a}, {self.bvp.b}]"
            )
        if np.any(pts <= self.bvp.a) or np.any(pts >= self.bvp.b):
            raise ValueError("interior collocation points must lie strictly inside (a, b)")
        if pts.size + 2 < len(basis):
            raise ValueError(
                f"{pts.size} interior points + 2 boundary rows under-determine "
                f"{len(basis)} coefficients"
            )

    @property
    def n_modes(self) -> int:
        return len(self.basis)


def default_collocation_points(bvp: BoundaryValueProblem, basis) -> np.ndarray:
    """Interior collocation points for a basis of M functions.

    Prefers the basis functions' own interpolation nodes that fall
    strictly inside (a, b); when those are too few to determine M
    coefficients (the usual case when the basis was built on a wider
    domain than the problem), a fresh uniform grid of M - 2 interior
    points makes the system square.
    """
    basis = tuple(basis)
    m = len(basis)
    nodes = basis[0].nodes
    inside = nodes[(nodes > bvp.a) & (nodes < bvp.b)]
    if inside.size + 2 >= m:
        return inside
    if m < 3:
        return np.empty(0)
    return np.linspace(bvp.a, bvp.b, m)[1:-1]


def make_collocation_problem(
    bvp: BoundaryValueProblem, basis, interior_points=None
) -> CollocationProblem:
    basis = tuple(basis)
    if interior_points is None:
        interior_points = default_collocation_points(bvp, basis)
    return CollocationProblem(bvp=bvp, basis=basis, interior_points=interior_points)


@dataclass(frozen=True)
class AssembledSystem:
    """Collocation matrix and right-hand side; interior rows first, then
    the boundary rows at a and b."""

    matrix: np.ndarray
    rhs: np.ndarray
    n_interior: int


def assemble(problem: CollocationProblem) -> AssembledSystem:
    """Rows for interior points x_j:

        A[j, i] = -phi_i''(x_j)/2 + [V(x_j) - E] phi_i(x_j),  rhs 0,

    with V the regularized potential; then one row per boundary condition
    pinning y(a) = y_a and y(b) = y_f.
    """
    bvp = problem.bvp
    pts = problem.interior_points
    m = problem.n_modes
    n_rows = pts.size + 2
    if n_rows < m:
        raise ValueError(f"under-determined system: {n_rows} rows for {m} coefficients")
    A = np.empty((n_rows, m))
    v = bvp.potential(pts) - bvp.E if pts.size else np.empty(0)
    for i, phi in enumerate(problem.basis):
        if pts.size:
            A[:-2, i] = -0.5 * phi.deriv(pts, order=2) + v * phi.eval(pts)
        A[-2, i] = phi.eval(bvp.a)
        A[-1, i] = phi.eval(bvp.b)
    rhs = np.zeros(n_rows)
    rhs[-2] = bvp.y_a
    rhs[-1] = bvp.y_f
    return AssembledSystem(matrix=A, rhs=rhs, n_interior=pts.size)


@dataclass(frozen=True)
class SpectralSolution:
    """Expansion coefficients of y(x) = sum_i c_i phi_i(x)."""

    coefficients: np.ndarray
    condition_estimate: float
    problem: CollocationProblem
    method: str

    def eval(self, x):
        vals = sum(c * phi.eval(x) for c, phi in zip(self.coefficients, self.problem.basis))
        return vals

    def deriv(self, x, order: int = 1):
        return sum(
            c * phi.deriv(x, order=order)
            for c, phi in zip(self.coefficients, self.problem.basis)
        )


def solve(problem: CollocationProblem) -> SpectralSolution:
    """Solve the collocation system for the coefficients.

    A square system goes through a direct partial-pivoting solve. An
    overdetermined one is solved in the least-squares sense with the two
    boundary rows weighted by 1e6 times the largest interior row norm, so
    the boundary conditions hold essentially exactly. A square system
    whose smallest singular value falls below 1e-14 of the largest is
    rank-deficient as posed (a basis whose members all satisfy one
    boundary condition produces a vacuous row); it is re-solved as the
    weighted minimum-norm least-squares problem, and the solve only
    counts as successful if the boundary values come out right.

    The condition estimate is the ratio of the extreme singular values
    of the solved matrix, ignoring singular values under the 1e-14 gate.
    """
    system = assemble(problem)
    A, rhs = system.matrix, system.rhs
    n_rows, m = A.shape
    bvp = problem.bvp

    sv = np.linalg.svd(A, compute_uv=False)
    square = n_rows == m
    if square and sv[-1] >= _SINGULAR_GATE * sv[0]:
        coeffs = np.linalg.solve(A, rhs)
        cond = float(sv[0] / sv[-1])
        method = "direct"
    else:
        weight = _BOUNDARY_WEIGHT * (
            np.max(np.linalg.norm(A[:-2], axis=1)) if system.n_interior else 1.0
        )
        Aw = A.copy()
        rw = rhs.copy()
        Aw[-2:] *= weight
        rw[-2:] *= weight
        coeffs, *_ = np.linalg.lstsq(Aw, rw, rcond=_SINGULAR_GATE)
        svw = np.linalg.svd(Aw, compute_uv=False)
        kept = svw[svw >= _SINGULAR_GATE * svw[0]]
        cond = float(svw[0] / kept[-1])
        method = "least-squares"

    sol = SpectralSolution(
        coefficients=coeffs,
        condition_estimate=cond,
        problem=problem,
        method=method,
    )
    tol = _BOUNDARY_TOL * max(1.0, abs(bvp.y_f))
    if abs(sol.eval(bvp.a) - bvp.y_a) > tol or abs(sol.eval(bvp.b) - bvp.y_f) > tol:
        raise NumericalError(
            f"boundary conditions not met; the collocation matrix is "
            f"numerically singular as posed (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})"
        )
    return sol


def residual(sol: SpectralSolution, eval_points) -> np.ndarray:
    """Pointwise defect L[y](x) - E y(x) of the represented solution,
    where L is the left side of the radial equation."""
    xs = np.atleast_1d(np.asarray(eval_points, dtype=float))
    bvp = sol.problem.bvp
    y = sol.eval(xs)
    ypp = sol.deriv(xs, order=2)
    return -0.5 * ypp + (bvp.potential(xs) - bvp.E) * y


def relative_residual_norm(sol: SpectralSolution, eval_points) -> float:
    """RMS of the defect divided by the RMS of the solution itself.

    Normalizing by the solution size is what makes the norm dip at an
    eigenvalue: near resonance the solution amplitude grows with the
    well-represented mode, while off resonance the boundary forcing
    drags in shapes the basis renders poorly. A zero solution reports
    the plain RMS defect (zero for the trivial problem).
    """
    res = residual(sol, eval_points)
    y = sol.eval(np.atleast_1d(np.asarray(eval_points, dtype=float)))
    res_rms = float(np.sqrt(np.mean(res * res)))
    y_rms = float(np.sqrt(np.mean(y * y)))
    return res_rms / y_rms if y_rms > 0.0 else res_rms


@dataclass(frozen=True)
class EnergyScan:
    """Residual-norm scan over trial energies."""

    energies: np.ndarray
    residual_norms: np.ndarray
    statuses: tuple[str, ...]
    argmin_energy: float
    argmin_status: str


def _scan_grid(bvp: BoundaryValueProblem, n: int = 201) -> np.ndarray:
    span = bvp.b - bvp.a
    return bvp.a + (np.arange(n) + 0.5) * span / n


def energy_scan(
    bvp: BoundaryValueProblem,
    basis,
    e_lo: float,
    e_hi: float,
    n_steps: int,
) -> EnergyScan:
    """Solve the problem on a uniform energy grid and record the
    solution-relative residual norm on a fixed dense interior grid of
    201 points.

    The discrete minimum is refined by the vertex of the parabola through
    it and its neighbors; a minimum on the scan edge is reported with
    status 'boundary-minimum' instead.
    """
    if not e_lo < e_hi:
        raise ValueError(f"need e_lo < e_hi, got {e_lo}, {e_hi}")
    if n_steps < 3:
        raise ValueError(f"need at least 3 scan steps, got {n_steps}")
    basis = tuple(basis)
    energies = np.linspace(e_lo, e_hi, n_steps)
    dense = _scan_grid(bvp)
    norms = np.full(n_steps, np.nan)
    statuses: list[str] = []
    for k, e in enumerate(energies):
        try:
            prob = make_collocation_problem(replace(bvp, E=e), basis)
            sol = solve(prob)
            norms[k] = relative_residual_norm(sol, dense)
            statuses.append("ok")
        except NumericalError as err:
            statuses.append(f"failed: {err}")
    ok = np.isfinite(norms)
    if not np.any(ok):
        raise NumericalError("no scan point solved successfully")
    idx = int(np.nanargmin(norms))
    if idx == 0 or idx == n_steps - 1 or not (ok[idx - 1] and ok[idx + 1]):
        refined = float(energies[idx])
        status = "boundary-minimum"
    else:
        r_prev, r_mid, r_next = norms[idx - 1], norms[idx], norms[idx + 1]
        denom = r_prev - 2.0 * r_mid + r_next
        step = energies[1] - energies[0]
        if denom <= 0.0:
            refined = float(energies[idx])
        else:
            refined = float(energies[idx] + 0.5 * step * (r_prev - r_next) / denom)
        status = "interior"
    return EnergyScan(
        energies=energies,
        residual_norms=norms,
        statuses=tuple(statuses),
        argmin_energy=refined,
        argmin_status=status,
    )
