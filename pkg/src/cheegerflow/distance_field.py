"""Distance-to-boundary fields and the inradius inequalities built on them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import shapely
from scipy import ndimage
from skimage import measure

from .checks import InequalityCheck, grid_tolerance
from .errors import DomainError
from .geometry import GridDomain, Polygon, area, grid_area, mask_outline, perimeter

__all__ = [
    "ScalarField",
    "VectorField",
    "LevelSetCurve",
    "distance_to_boundary",
    "grid_distance",
    "inradius",
    "polygon_inradius",
    "reduced_inradius",
    "gradient",
    "makai_field",
    "divergence",
    "divergence_integral",
    "boundary_flux",
    "level_set_lengths",
    "coarea_integral",
    "coarea_check",
    "bonnesen_check",
    "finalest_check",
    "medial_axis_cells",
]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Cell-centered values on a grid; cells outside the mask hold 0."""

    grid: GridDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.dims:
            raise ValueError(f"field shape {v.shape} != grid dims {self.grid.dims}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        v[~self.grid.mask] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def interior(self) -> np.ndarray:
        return self.values[self.grid.mask]

    def max(self) -> float:
        return float(self.interior().max())


@dataclass(frozen=True, eq=False)
class VectorField:
    """Cell-centered vector field; components vanish outside the mask."""

    grid: GridDomain
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self):
        for name in ("vx", "vy"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != self.grid.dims:
                raise ValueError(f"{name} shape {v.shape} != grid dims {self.grid.dims}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite values")
            v[~self.grid.mask] = 0.0
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def speed(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    @classmethod
    def from_function(cls, g: GridDomain, fn) -> "VectorField":
        X, Y = g.coords()
        vx, vy = fn(X, Y)
        return cls(g, np.broadcast_to(vx, g.dims), np.broadcast_to(vy, g.dims))


@dataclass(frozen=True)
class LevelSetCurve:
    level: float
    length: float
    components: int
    skipped: bool = False


# ---------------------------------------------------------------------------
# distance and inradius


def _point_segment_distance(P: np.ndarray, A: np.ndarray, B: np.ndarray, chunk: int = 4096):
    D = B - A
    dd = np.einsum("ij,ij->i", D, D)
    dd[dd == 0] = 1.0
    out = np.empty(len(P))
    for s in range(0, len(P), chunk):
        p = P[s : s + chunk, None, :]
        t = np.clip(np.einsum("pkj,kj->pk", p - A, D) / dd, 0.0, 1.0)
        q = A + t[..., None] * D
        out[s : s + chunk] = np.sqrt(((p - q) ** 2).sum(-1)).min(axis=1)
    return out


def distance_to_boundary(p: Polygon, g: GridDomain) -> ScalarField:
    """Exact Euclidean distance from each interior cell center to the polygon."""
    X, Y = g.coords()
    pts = np.column_stack([X[g.mask], Y[g.mask]])
    A, B = p.edges
    vals = np.zeros(g.dims)
    vals[g.mask] = _point_segment_distance(pts, A, B)
    return ScalarField(g, vals)


def grid_distance(g: GridDomain) -> ScalarField:
    """Distance field of a bare mask, measured to the cell faces.

    Falls back to this when no exact polygon is known; uses the exact
    polygon distance when ``g.polygon`` is set.
    """
    if g.polygon is not None:
        return distance_to_boundary(g.polygon, g)
    d = ndimage.distance_transform_edt(g.mask) * g.cell_size - 0.5 * g.cell_size
    return ScalarField(g, np.maximum(d, 0.0))


def inradius(phi: ScalarField, refine: bool = False) -> float:
    """Largest distance value over interior cells.

    With ``refine=True`` the ridge between two adjacent cells is resolved
    using the unit slope of a distance function: the peak between values
    ``a`` and ``b`` a cell apart is at most ``(a + b + h) / 2``.
    """
    top = phi.max()
    if not refine:
        return top
    g = phi.grid
    u, m, h = phi.values, g.mask, g.cell_size
    best = top
    for axis in (0, 1):
        fwd, _ = _neighbors(m, axis)
        nb = np.roll(u, -1, axis)
        est = 0.5 * (u[fwd] + nb[fwd] + h)
        if est.size:
            best = max(best, float(est.max()))
    return best


def polygon_inradius(p: Polygon, rel_tol: float = 1e-7) -> float:
    """Radius of the largest inscribed disk of a polygon."""
    xmin, ymin, xmax, ymax = p.bounds
    tol = rel_tol * max(xmax - xmin, ymax - ymin)
    line = shapely.maximum_inscribed_circle(p.to_shapely(), tolerance=tol)
    return float(line.length)


def reduced_inradius(rho: float, area_: float) -> float:
    """``rho / (1 + pi rho^2 / area)``; lies strictly between rho/2 and rho
    whenever pi rho^2 < area."""
    if not (rho > 0 and area_ > 0):
        raise DomainError(f"reduced inradius needs rho > 0 and area > 0 (got {rho}, {area_})")
    return rho / (1.0 + math.pi * rho * rho / area_)


# ---------------------------------------------------------------------------
# differential operators


def _neighbors(mask: np.ndarray, axis: int):
    fwd = np.zeros_like(mask)
    bwd = np.zeros_like(mask)
    sl = [slice(None)] * 2
    lo, hi = list(sl), list(sl)
    lo[axis], hi[axis] = slice(0, -1), slice(1, None)
    fwd[tuple(lo)] = mask[tuple(hi)]
    bwd[tuple(hi)] = mask[tuple(lo)]
    return fwd & mask, bwd & mask


def _diff(u: np.ndarray, mask: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference, one-sided where a neighbor is missing, 0 if both are."""
    fwd, bwd = _neighbors(mask, axis)
    up = np.roll(u, -1, axis)
    dn = np.roll(u, 1, axis)
    out = np.zeros_like(u, dtype=float)
    both = fwd & bwd
    out[both] = (up[both] - dn[both]) / (2 * h)
    only_f = fwd & ~bwd
    out[only_f] = (up[only_f] - u[only_f]) / h
    only_b = bwd & ~fwd
    out[only_b] = (u[only_b] - dn[only_b]) / h
    return out


def gradient(phi: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    g = phi.grid
    return (_diff(phi.values, g.mask, 0, g.cell_size), _diff(phi.values, g.mask, 1, g.cell_size))


def medial_axis_cells(phi: ScalarField, threshold: float = 0.5) -> np.ndarray:
    """Cells where forward and backward differences disagree by more than ``threshold``."""
    g = phi.grid
    u, m, h = phi.values, g.mask, g.cell_size
    out = np.zeros_like(m)
    for axis in (0, 1):
        fwd, bwd = _neighbors(m, axis)
        both = fwd & bwd
        df = (np.roll(u, -1, axis) - u) / h
        db = (u - np.roll(u, 1, axis)) / h
        out |= both & (np.abs(df - db) > threshold)
    return out


def makai_field(phi: ScalarField, rho: float) -> VectorField:
    """The field ``-(1 - phi/rho) grad phi``.

    Unit outward normal on the boundary, zero at points of maximal
    distance; reduces to ``V(x) = x`` on the unit disk.
    """
    if not rho > 0:
        raise DomainError("rho must be positive")
    gx, gy = gradient(phi)
    s = -(1.0 - phi.values / rho)
    return VectorField(phi.grid, s * gx, s * gy)


def divergence(V: VectorField) -> np.ndarray:
    g = V.grid
    return _diff(V.vx, g.mask, 0, g.cell_size) + _diff(V.vy, g.mask, 1, g.cell_size)


def divergence_integral(V: VectorField, g: GridDomain | None = None) -> float:
    """Cell sum of the discrete divergence times cell area.

    The sum telescopes to the flux through the cell faces on the mask
    boundary; see :func:`boundary_flux` for the contour-based variant.
    """
    g = g or V.grid
    return float(divergence(V)[g.mask].sum() * g.cell_size**2)


def _extend_outside(g: GridDomain, a: np.ndarray) -> np.ndarray:
    idx = ndimage.distance_transform_edt(~g.mask, return_distances=False, return_indices=True)
    return a[idx[0], idx[1]]


def boundary_flux(V: VectorField, g: GridDomain | None = None) -> float:
    """Outward flux of ``V`` through the marching-squares outline of the mask."""
    g = g or V.grid
    vx = _extend_outside(g, V.vx)
    vy = _extend_outside(g, V.vy)
    total = 0.0
    for poly in mask_outline(g):
        a, b = poly.edges
        mid = 0.5 * (a + b)
        ij = (mid - np.asarray(g.origin)) / g.cell_size
        fx = ndimage.map_coordinates(vx, ij.T, order=1, mode="nearest")
        fy = ndimage.map_coordinates(vy, ij.T, order=1, mode="nearest")
        d = b - a
        total += float(np.sum(fx * d[:, 1] - fy * d[:, 0]))
    return total


# ---------------------------------------------------------------------------
# level sets


def level_set_lengths(phi: ScalarField, levels: Sequence[float]) -> list[LevelSetCurve]:
    """Marching-squares length of ``{phi = t}`` for each requested level.

    Levels outside ``(0, max phi)`` are returned with ``skipped=True``.
    """
    top = phi.max()
    out = []
    bad = []
    for t in levels:
        t = float(t)
        if not 0.0 < t < top:
            bad.append(t)
            out.append(LevelSetCurve(t, 0.0, 0, skipped=True))
            continue
        contours = measure.find_contours(phi.values, t)
        length = sum(float(np.hypot(*np.diff(c, axis=0).T).sum()) for c in contours)
        out.append(LevelSetCurve(t, length * phi.grid.cell_size, len(contours)))
    if bad:
        warnings.warn(f"levels outside (0, {top:.6g}) skipped: {bad}", stacklevel=2)
    return out


def _level_profile(phi: ScalarField, n_levels: int, top: float | None = None):
    """Sample ``t -> L_t`` on ``[0, top]``.

    Levels are placed inside the sampled range ``(0, max phi)``; the ends
    at 0 and at ``top`` are linearly extrapolated from the nearest two
    samples (clipped at zero). ``top`` may exceed the largest cell value
    when the ridge of the distance function falls between cell centers.
    """
    peak = phi.max()
    top = inradius(phi, refine=True) if top is None else top
    ts = min(top, peak) * np.arange(1, n_levels + 1) / (n_levels + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        L = np.array([c.length for c in level_set_lengths(phi, ts)])
    l0 = max(2 * L[0] - L[1], 0.0)
    slope = (L[-1] - L[-2]) / (ts[-1] - ts[-2])
    t_end = top
    if slope < 0:
        t_end = min(top, ts[-1] - L[-1] / slope)
    l1 = max(L[-1] + slope * (t_end - ts[-1]), 0.0)
    t_all = np.concatenate([[0.0], ts, [t_end]])
    L_all = np.concatenate([[l0], L, [l1]])
    return t_all, L_all


def coarea_integral(phi: ScalarField, n_levels: int = 64, rho: float | None = None) -> float:
    """Trapezoid estimate of the integral of level-set length over all levels."""
    t, L = _level_profile(phi, n_levels, top=rho)
    return float(np.trapezoid(L, t))


def coarea_check(
    phi: ScalarField,
    g: GridDomain | None = None,
    n_levels: int = 64,
    rho: float | None = None,
) -> float:
    """Relative defect between the integrated level-set length and the grid area."""
    if n_levels < 16:
        raise DomainError("coarea check needs at least 16 levels")
    g = g or phi.grid
    a = grid_area(g)
    return abs(coarea_integral(phi, n_levels, rho) - a) / a


def bonnesen_check(p: Polygon, rho: float | None = None, rel_tol: float = 1e-9) -> InequalityCheck:
    """``rho * perimeter >= area + pi rho^2`` for a simply connected polygon."""
    rho = polygon_inradius(p) if rho is None else rho
    lhs = rho * perimeter(p)
    rhs = area(p) + math.pi * rho * rho
    return InequalityCheck("bonnesen", lhs, rhs, rel_tol * rhs)


def finalest_check(
    phi: ScalarField,
    g: GridDomain | None = None,
    rho: float | None = None,
    n_levels: int = 64,
    tol: float | None = None,
) -> InequalityCheck:
    """Level-set evaluation of ``integral (1 - phi/rho) lap(phi) <= -pi rho``.

    The left side is computed as ``(1/rho) * integral_0^rho (L_t - L_0) dt``
    with ``L_0`` the boundary length, never through a pointwise Laplacian.
    """
    g = g or phi.grid
    rho = inradius(phi, refine=True) if rho is None else rho
    t, L = _level_profile(phi, n_levels, top=rho)
    L0 = perimeter(g.polygon) if g.polygon is not None else L[0]
    value = (float(np.trapezoid(L, t)) - rho * L0) / rho
    bound = -math.pi * rho
    if tol is None:
        tol = grid_tolerance(bound, g.resolution)
    return InequalityCheck("finalest", value, bound, tol, relation="<=")
