"""Dirichlet Laplacian on a cell mask, its ground state and related bounds."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from .checks import InequalityCheck
from .distance_field import ScalarField
from .errors import ConvergenceError, DomainError
from .geometry import GridDomain

__all__ = [
    "DirichletLaplacian",
    "assemble",
    "EigenResult",
    "smallest_eigenvalue",
    "rayleigh_quotient",
    "check_cheeger_inequality",
    "check_makai",
    "SOLVER_TOL",
]

SOLVER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DirichletLaplacian:
    """5-point ``-Laplace`` on interior cells; exterior neighbours are zero.

    ``index`` maps grid cells to unknowns (``-1`` outside the mask) and
    ``cells`` lists the ``(i, j)`` of each unknown.
    """

    grid: GridDomain
    index: np.ndarray
    cells: np.ndarray
    matrix: sp.csr_matrix

    @property
    def size(self) -> int:
        return len(self.cells)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def as_operator(self) -> LinearOperator:
        return LinearOperator(self.matrix.shape, matvec=self.matvec, dtype=float)

    def to_field(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros(self.grid.dims)
        u[self.cells[:, 0], self.cells[:, 1]] = x
        return u

    def from_field(self, u) -> np.ndarray:
        u = np.asarray(u.values if isinstance(u, ScalarField) else u, dtype=float)
        return u[self.cells[:, 0], self.cells[:, 1]]


def assemble(g: GridDomain, check_symmetry: bool = True) -> DirichletLaplacian:
    """Sparse 5-point operator: ``4/dx**2`` on the diagonal, ``-1/dx**2``
    for each interior neighbour."""
    mask = g.mask
    k = int(mask.sum())
    idx = np.full(mask.shape, -1, dtype=np.int64)
    idx[mask] = np.arange(k)
    cells = np.argwhere(mask)
    inv = 1.0 / g.cell_size**2
    rows = [np.arange(k)]
    cols = [np.arange(k)]
    vals = [np.full(k, 4 * inv)]
    pidx = np.pad(idx, 1, constant_values=-1)
    ci, cj = cells[:, 0] + 1, cells[:, 1] + 1
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = pidx[ci + di, cj + dj]
        ok = nb >= 0
        rows.append(np.arange(k)[ok])
        cols.append(nb[ok])
        vals.append(np.full(int(ok.sum()), -inv))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(k, k)
    )
    L = DirichletLaplacian(g, idx, cells, A)
    if check_symmetry and k > 1:
        rng = np.random.default_rng(0)
        u, v = rng.standard_normal(k), rng.standard_normal(k)
        a, b = float(L.matvec(u) @ v), float(u @ L.matvec(v))
        if abs(a - b) > 1e-12 * max(abs(a), abs(b), 1.0):
            raise AssertionError("assembled operator is not symmetric")
    return L


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Smallest eigenpair; ``eigenfunction`` has unit discrete L2 norm."""

    eigenvalue: float
    eigenfunction: ScalarField
    residual: float
    iterations: int
    inner_iterations: int = 0

    @property
    def lam(self) -> float:
        return self.eigenvalue

    def to_dict(self) -> dict:
        return {"lambda": self.eigenvalue, "residual": self.residual, "iterations": self.iterations}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def smallest_eigenvalue(L: DirichletLaplacian, rtol: float = 1e-10, tol: float = SOLVER_TOL,
                        max_outer: int = 2000, max_inner: int = 10000) -> EigenResult:
    """Inverse power iteration with conjugate-gradient inner solves.

    Starts from the all-ones vector on the mask. Each outer step solves
    ``A y = u`` warm-started from ``u / lambda``, normalizes and updates the
    Rayleigh quotient; it stops once ``||A u - lambda u|| <= tol * lambda``
    (``u`` has unit Euclidean norm).
    """
    n = L.size
    A = L.matrix
    if n == 1:
        lam = float(A[0, 0])
        u = L.to_field(np.ones(1) / L.grid.cell_size)
        return EigenResult(lam, ScalarField(L.grid, u), 0.0, 0, 0)
    u = np.ones(n) / np.sqrt(n)
    lam = float(u @ (A @ u))
    inner_total = 0
    res = np.inf
    for it in range(1, max_outer + 1):
        counter = [0]

        def cb(_):
            counter[0] += 1

        y, info = cg(A, u, x0=u / lam, rtol=rtol, maxiter=max_inner, callback=cb)
        inner_total += counter[0]
        if info != 0:
            raise ConvergenceError(
                "conjugate gradient did not converge", outer=it, inner=counter[0], info=info, lam=lam
            )
        u = y / np.linalg.norm(y)
        Au = A @ u
        lam = float(u @ Au)
        res = float(np.linalg.norm(Au - lam * u))
        if res <= tol * lam:
            break
    else:
        raise ConvergenceError(
            "inverse iteration did not converge", outer=max_outer, residual=res, lam=lam
        )
    if u.sum() < 0:
        u = -u
    # unit norm in the discrete L2 sense: sum u^2 dx^2 = 1
    field_ = L.to_field(u / L.grid.cell_size)
    return EigenResult(lam, ScalarField(L.grid, field_), res, it, inner_total)


def rayleigh_quotient(L: DirichletLaplacian, u) -> float:
    """``<A u, u> / <u, u>`` for a field vanishing outside the mask."""
    x = L.from_field(u)
    nrm = float(x @ x)
    if nrm == 0:
        raise DomainError("test function is identically zero")
    return float(x @ (L.matrix @ x)) / nrm


def potential_flow(L: DirichletLaplacian, h: float) -> np.ndarray:
    """Solve ``-Laplace psi = -h`` with ``psi = 0`` outside; returns a grid field.

    The discrete gradient of ``psi`` has net outflow ``h * dx**2`` from
    every interior cell, the same production as the grid flow network.
    """
    from scipy.sparse.linalg import spsolve

    x = spsolve(L.matrix.tocsc(), np.full(L.size, -float(h)))
    return L.to_field(np.atleast_1d(x))


def check_cheeger_inequality(lam: float, h_lower: float, tol: float = 0.0) -> InequalityCheck:
    """``lambda >= h**2 / 4``."""
    return InequalityCheck("cheeger_ineq", float(lam), float(h_lower) ** 2 / 4, tol)


def check_makai(lam: float, rho_tilde: float, tol: float = 0.0) -> InequalityCheck:
    """``lambda >= 1 / (4 rho~**2)``."""
    if not rho_tilde > 0:
        raise DomainError("reduced inradius must be positive")
    return InequalityCheck("makai", float(lam), 1.0 / (4 * rho_tilde**2), tol)
