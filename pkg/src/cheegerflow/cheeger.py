"""Grid max-flow bracketing of the Cheeger constant and certificate checks.

A grid domain becomes a network with one node per interior cell. Every
cell receives ``h * dx**2`` from a super-source, neighbouring cells are
joined by arcs of capacity ``w * dx`` and arcs leaving the mask go to a
single sink. ``h`` is admissible iff all source arcs saturate; bisection on
``h`` brackets the Cheeger constant between a feasible value (``h_lower``)
and the quotient of the min-cut cell set at the first infeasible value
(``h_upper``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage
from skimage import measure

from . import geometry
from .checks import InequalityCheck, grid_tolerance
from .distance_field import (
    ScalarField,
    VectorField,
    grid_distance,
    inradius,
    polygon_inradius,
    reduced_inradius,
)
from .errors import BracketError, DomainError
from .geometry import GridDomain, Polygon
from .maxflow import REL_TOL, Flow, Network, check_feasible, max_flow, min_cut

__all__ = [
    "CutMetricStencil",
    "STENCILS",
    "get_stencil",
    "GridNetwork",
    "build_grid_network",
    "feasible",
    "CheegerResult",
    "cheeger_constant",
    "flow_to_vector_field",
    "block_divergence",
    "CertificateReport",
    "certify_lower_bound",
    "quotient_of_candidate",
    "SubdomainReport",
    "subdomain_bound_suite",
]


# ---------------------------------------------------------------------------
# cut metric


@dataclass(frozen=True)
class CutMetricStencil:
    """Neighbour offsets (one per undirected direction) and their weights.

    A straight cut of length ``L`` with unit normal ``n`` crosses
    ``L * |e . n| / dx`` arcs of offset ``e``, so the cut capacity per unit
    length is ``N(n) = sum_e w_e |e . n|``.
    """

    name: str
    offsets: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.offsets) != len(self.weights) or not self.offsets:
            raise ValueError("offsets and weights must be non-empty and equal length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("stencil weights must be positive")
        table = dict(zip(self.offsets, self.weights))
        for (dx, dy), w in table.items():
            r = (-dy, dx)
            w_r = table.get(r, table.get((-r[0], -r[1])))
            if w_r is None or not math.isclose(w, w_r):
                raise ValueError("stencil must be symmetric under 90 degree rotation")

    def metric(self, theta) -> np.ndarray:
        """Cut capacity per unit length of a line with normal angle ``theta``."""
        n = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        e = np.asarray(self.offsets, dtype=float)
        return np.abs(n @ e.T) @ np.asarray(self.weights)

    def anisotropy(self) -> tuple[float, float, float]:
        """(min, mean, max) of the cut metric over directions."""
        N = self.metric(np.linspace(0, np.pi / 2, 2001))
        return float(N.min()), float(N.mean()), float(N.max())

    @property
    def reach(self) -> int:
        return max(max(abs(a), abs(b)) for a, b in self.offsets)


_AXES = ((1, 0), (0, 1))
_DIAGS = ((1, 1), (1, -1))
# weights with axis-aligned cuts costing exactly 1 per unit length and the
# direction-averaged cut metric equal to 1
_B8 = (1 - math.pi / 4) / (2 - math.sqrt(2))

STENCILS = {
    "4": CutMetricStencil("4", _AXES, (math.pi / 4,) * 2),
    "8": CutMetricStencil("8", _AXES + _DIAGS, (1 - 2 * _B8,) * 2 + (_B8,) * 2),
    # exact length on axis and diagonal lines, too long in between
    "8-octagonal": CutMetricStencil(
        "8-octagonal", _AXES + _DIAGS, (math.sqrt(2) - 1,) * 2 + (1 - 1 / math.sqrt(2),) * 2
    ),
}


def get_stencil(stencil) -> CutMetricStencil:
    if isinstance(stencil, CutMetricStencil):
        return stencil
    key = str(stencil)
    if key not in STENCILS:
        raise ValueError(f"unknown stencil {stencil!r}; choose from {sorted(STENCILS)}")
    return STENCILS[key]


# ---------------------------------------------------------------------------
# network


@dataclass(frozen=True, eq=False)
class GridNetwork(Network):
    """Network built from a grid, remembering where each arc came from.

    ``arc_kind`` is 0 for source arcs, 1 for cell-cell arcs and 2 for
    cell-sink arcs; ``arc_offset`` indexes ``stencil.offsets`` (``-1`` for
    source arcs) and ``arc_sign`` is +1 when the arc runs along the offset.
    Node ``k`` is interior cell ``k`` in ``cells`` order.
    """

    cells: np.ndarray = field(default=None)
    arc_kind: np.ndarray = field(default=None)
    arc_offset: np.ndarray = field(default=None)
    arc_sign: np.ndarray = field(default=None)
    h: float = 0.0
    cell_area: float = 0.0
    stencil: CutMetricStencil | None = None

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def with_h(self, h: float) -> "GridNetwork":
        caps = np.array(self.caps, dtype=float)
        caps[self.arc_kind == 0] = h * self.cell_area
        return GridNetwork(
            self.n, self.source, self.sink, self.tails, self.heads, caps,
            self.cells, self.arc_kind, self.arc_offset, self.arc_sign, h, self.cell_area, self.stencil,
        )


def build_grid_network(g: GridDomain, h: float, stencil="8") -> GridNetwork:
    """Uniform-production network on the interior cells of ``g``.

    Each unordered neighbour pair contributes arcs in both directions of
    capacity ``w * dx``. A neighbour outside the mask contributes one arc to
    the sink per offset, so the sink collapses the whole exterior to a point.
    """
    if h < 0:
        raise DomainError("h must be nonnegative")
    st = get_stencil(stencil)
    mask = g.mask
    dx = g.cell_size
    k = int(mask.sum())
    idx = np.full(mask.shape, -1, dtype=np.int64)
    idx[mask] = np.arange(k)
    cells = np.argwhere(mask)
    s, t = k, k + 1
    r = st.reach
    pidx = np.pad(idx, r, constant_values=-1)

    tails = [np.full(k, s)]
    heads = [np.arange(k)]
    caps = [np.full(k, h * dx * dx)]
    kind = [np.zeros(k, np.int8)]
    off = [np.full(k, -1, np.int16)]
    sign = [np.ones(k, np.int8)]
    ci, cj = cells[:, 0], cells[:, 1]
    for o, ((ox, oy), w) in enumerate(zip(st.offsets, st.weights)):
        for sgn in (1, -1):
            nb = pidx[ci + r + sgn * ox, cj + r + sgn * oy]
            inside = nb >= 0
            c = w * dx
            # interior pairs: each direction once (the -offset pass adds the reverse)
            tails.append(np.arange(k)[inside])
            heads.append(nb[inside])
            caps.append(np.full(int(inside.sum()), c))
            kind.append(np.ones(int(inside.sum()), np.int8))
            off.append(np.full(int(inside.sum()), o, np.int16))
            sign.append(np.full(int(inside.sum()), sgn, np.int8))
            out = ~inside
            tails.append(np.arange(k)[out])
            heads.append(np.full(int(out.sum()), t))
            caps.append(np.full(int(out.sum()), c))
            kind.append(np.full(int(out.sum()), 2, np.int8))
            off.append(np.full(int(out.sum()), o, np.int16))
            sign.append(np.full(int(out.sum()), sgn, np.int8))
    return GridNetwork(
        k + 2, s, t,
        np.concatenate(tails), np.concatenate(heads), np.concatenate(caps).astype(float),
        cells, np.concatenate(kind), np.concatenate(off), np.concatenate(sign),
        float(h), dx * dx, st,
    )


def _solve(net: GridNetwork):
    f, value = max_flow(net)
    demand = net.h * net.cell_area * net.n_cells
    ok = value >= demand * (1 - REL_TOL) or demand == 0
    return ok, f, value


def feasible(g: GridDomain, h: float, stencil="8") -> bool:
    """True iff every cell can ship ``h * dx**2`` to the boundary."""
    ok, _, _ = _solve(build_grid_network(g, h, stencil))
    return ok


# ---------------------------------------------------------------------------
# flows as vector fields


def _face_fluxes(net: GridNetwork, f: Flow, shape) -> tuple[np.ndarray, np.ndarray]:
    """Net arc flows rerouted onto cell faces.

    ``Fx[i, j]`` is the flux through the face between cells ``(i, j)`` and
    ``(i+1, j)`` in the +x direction; ``Fy`` likewise in y. A diagonal arc
    is sent half along each of its two axis paths, which keeps the net
    outflow of every cell unchanged.
    """
    st = net.stencil
    nx, ny = shape
    Fx = np.zeros((nx + 2, ny + 2))
    Fy = np.zeros((nx + 2, ny + 2))
    vals = np.asarray(f.values, dtype=float)
    sel = net.arc_kind > 0
    cell = net.cells[net.tails[sel]]
    o = net.arc_offset[sel]
    sg = net.arc_sign[sel].astype(int)
    v = vals[sel]
    offs = np.asarray(st.offsets)
    ex = offs[o, 0] * sg
    ey = offs[o, 1] * sg
    # shift by one so index -1 lands in the padding
    i = cell[:, 0] + 1
    j = cell[:, 1] + 1

    def add_x(ii, jj, step, val):
        # step +1: face (ii, ii+1); step -1: face (ii-1, ii) traversed in -x
        np.add.at(Fx, (np.where(step > 0, ii, ii - 1), jj), step * val)

    def add_y(ii, jj, step, val):
        np.add.at(Fy, (ii, np.where(step > 0, jj, jj - 1)), step * val)

    ax = ey == 0
    add_x(i[ax], j[ax], ex[ax], v[ax])
    ay = ex == 0
    add_y(i[ay], j[ay], ey[ay], v[ay])
    dg = (ex != 0) & (ey != 0)
    if dg.any():
        i, j, ex, ey, v = i[dg], j[dg], ex[dg], ey[dg], 0.5 * v[dg]
        # x first, then y
        add_x(i, j, ex, v)
        add_y(i + ex, j, ey, v)
        # y first, then x
        add_y(i, j, ey, v)
        add_x(i, j + ey, ex, v)
    return Fx, Fy


def flow_to_vector_field(net: GridNetwork, f: Flow, g: GridDomain, relax: bool = True,
                         speed_budget: float = 1.04) -> VectorField:
    """Cell-centred velocity from face fluxes.

    ``V_x`` at a cell is the mean of its west and east face fluxes divided
    by the face length ``dx``; likewise ``V_y``. Over any 2x2 block of
    interior cells the discrete divergence of this field equals the mean
    net outflow of the four cells, i.e. the production rate ``h``.

    A max flow is far from unique and the solver's choice usually carries
    large circulations. With ``relax=True`` the field is moved toward its
    irrotational part (same cell outflows, same fluxes through the mask
    boundary, interior fluxes from a potential) as far as the maximum speed
    stays within ``max(raw maximum, speed_budget)``. Both end points have
    the same block divergences, so the blend does too.
    """
    if net.h == 0 or not np.any(f.values):
        z = np.zeros(g.dims)
        return VectorField(g, z, z)
    Fx, Fy = _face_fluxes(net, f, g.dims)
    vx, vy = _cell_velocity(Fx, Fy, g.cell_size)
    if not relax:
        return VectorField(g, vx, vy)
    relaxed = _irrotational_part(Fx, Fy, g.mask)
    if relaxed is None:
        return VectorField(g, vx, vy)
    px, py = _cell_velocity(*relaxed, g.cell_size)
    m = g.mask
    cap = max(float(np.hypot(vx, vy)[m].max()), speed_budget)

    def top_speed(a):
        return float(np.hypot(vx + a * (px - vx), vy + a * (py - vy))[m].max())

    if top_speed(1.0) <= cap:
        a = 1.0
    else:
        # max speed is convex in the weight: admissible weights form [0, a*]
        lo, hi = 0.0, 1.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if top_speed(mid) <= cap else (lo, mid)
        a = lo
    return VectorField(g, vx + a * (px - vx), vy + a * (py - vy))


def _irrotational_part(Fx, Fy, mask):
    """Neumann potential flow matching the cell outflows and boundary fluxes.

    Returns ``None`` when a 4-connected component of the mask exchanges
    flow with another one (possible through diagonal arcs), since the
    Neumann problem is then not solvable per component.
    """
    import scipy.sparse as sp
    from scipy.sparse.csgraph import connected_components
    from scipy.sparse.linalg import spsolve

    M = np.pad(mask, 1)
    k = int(M.sum())
    idx = np.full(M.shape, -1, dtype=np.int64)
    idx[M] = np.arange(k)
    # net outflow of every padded cell
    out = Fx.copy()
    out[1:, :] -= Fx[:-1, :]
    out += Fy
    out[:, 1:] -= Fy[:, :-1]
    ix = M[:-1, :] & M[1:, :]
    iy = M[:, :-1] & M[:, 1:]
    # outflow through faces shared with exterior cells stays fixed
    b = out.copy()
    b[:-1, :][ix] -= Fx[:-1, :][ix]
    b[1:, :][ix] += Fx[:-1, :][ix]
    b[:, :-1][iy] -= Fy[:, :-1][iy]
    b[:, 1:][iy] += Fy[:, :-1][iy]
    rhs = (out - b)[M]
    a0 = np.concatenate([idx[:-1, :][ix], idx[:, :-1][iy]])
    a1 = np.concatenate([idx[1:, :][ix], idx[:, 1:][iy]])
    ones = np.ones(len(a0))
    adj = sp.csr_matrix((ones, (a0, a1)), shape=(k, k))
    adj = adj + adj.T
    lap = sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj
    ncomp, labels = connected_components(adj, directed=False)
    scale = max(float(np.abs(rhs).max()), 1e-300)
    if np.any(np.abs(np.bincount(labels, rhs, ncomp)) > 1e-7 * scale * np.sqrt(k)):
        return None
    # pin one node per component
    keep = np.ones(k, dtype=bool)
    keep[np.unique(labels, return_index=True)[1]] = False
    psi = np.zeros(k)
    # outflow of cell c through interior faces is sum (psi_c - psi_nb) = lap @ psi
    psi[keep] = spsolve(lap[keep][:, keep].tocsc(), rhs[keep])
    P = np.zeros(M.shape)
    P[M] = psi
    Gx, Gy = Fx.copy(), Fy.copy()
    Gx[:-1, :][ix] = (P[:-1, :] - P[1:, :])[ix]
    Gy[:, :-1][iy] = (P[:, :-1] - P[:, 1:])[iy]
    return Gx, Gy


def _cell_velocity(Fx, Fy, dx):
    # padded layout: cell (i, j) sits at (i+1, j+1)
    vx = (Fx[1:-1, 1:-1] + Fx[:-2, 1:-1]) / (2 * dx)
    vy = (Fy[1:-1, 1:-1] + Fy[1:-1, :-2]) / (2 * dx)
    return vx, vy


def block_divergence(V: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """Divergence averaged over 2x2 blocks of cells.

    Returns the values and a mask of blocks whose four cells are interior.
    Block ``(i, j)`` covers cells ``i..i+1`` by ``j..j+1``.
    """
    dx = V.grid.cell_size
    vx, vy = np.asarray(V.vx), np.asarray(V.vy)
    m = V.grid.mask
    inside = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]
    dvx = (vx[1:, :-1] + vx[1:, 1:] - vx[:-1, :-1] - vx[:-1, 1:]) / (2 * dx)
    dvy = (vy[:-1, 1:] + vy[1:, 1:] - vy[:-1, :-1] - vy[1:, :-1]) / (2 * dx)
    return dvx + dvy, inside


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of checking ``|V| <= 1`` and ``div V >= h`` on the grid."""

    h_claimed: float
    max_speed: float
    min_div: float
    tol: float
    verdict: bool
    n_blocks: int = 0
    worst_block: tuple | None = None

    @property
    def speed_ok(self) -> bool:
        return self.max_speed <= 1 + self.tol

    @property
    def div_ok(self) -> bool:
        return self.min_div >= self.h_claimed - self.tol

    def message(self) -> str:
        if self.verdict:
            return f"certificate holds: h >= {self.h_claimed:.6g}"
        parts = []
        if not self.speed_ok:
            parts.append(f"speed bound violated: max |V| = {self.max_speed:.6g} > 1 + {self.tol:g}")
        if not self.div_ok:
            parts.append(
                f"pointwise divergence bound violated: min div V = {self.min_div:.6g} "
                f"< h - tol = {self.h_claimed - self.tol:.6g} (block {self.worst_block})"
            )
        return "; ".join(parts)

    def to_dict(self) -> dict:
        return {
            "h_claimed": self.h_claimed,
            "max_speed": self.max_speed,
            "min_div": self.min_div,
            "tol": self.tol,
            "verdict": "pass" if self.verdict else "fail",
            "n_blocks": self.n_blocks,
        }


def certify_lower_bound(V: VectorField, g: GridDomain | None = None, h_claimed: float = 0.0,
                        tol: float = 0.05) -> CertificateReport:
    """Check the two certificate conditions on interior cells and blocks."""
    g = V.grid if g is None else g
    if g.mask.shape != np.shape(V.vx):
        raise ValueError("vector field does not live on this grid")
    speed = V.speed()[g.mask]
    max_speed = float(speed.max()) if speed.size else 0.0
    div, inside = block_divergence(V)
    if inside.any():
        vals = np.where(inside, div, np.inf)
        worst = np.unravel_index(np.argmin(vals), vals.shape)
        min_div = float(vals[worst])
        worst = tuple(int(x) for x in worst)
    else:
        min_div, worst = float("nan"), None
    verdict = bool(max_speed <= 1 + tol and min_div >= h_claimed - tol)
    return CertificateReport(float(h_claimed), max_speed, min_div, float(tol), verdict,
                             int(inside.sum()), worst)


# ---------------------------------------------------------------------------
# bisection


@dataclass(frozen=True, eq=False)
class CheegerResult:
    """Bracket ``h_lower <= h_Omega <= h_upper`` with its witnesses."""

    h_lower: float
    h_upper: float
    cheeger_set: tuple[Polygon, ...]
    certificate: VectorField
    iterations: int
    resolution: int | None = None
    stencil: str = "8"
    cut_cells: np.ndarray | None = None
    h_infeasible: float = math.nan
    certificate_report: CertificateReport | None = None

    @property
    def gap(self) -> float:
        return self.h_upper - self.h_lower

    def to_dict(self) -> dict:
        rep = self.certificate_report
        return {
            "h_lower": self.h_lower,
            "h_upper": self.h_upper,
            "resolution": self.resolution,
            "stencil": self.stencil,
            "iterations": self.iterations,
            "cheeger_set": [p.vertices.tolist() for p in self.cheeger_set],
            "certificate_stats": {
                "max_speed": rep.max_speed if rep else None,
                "min_div": rep.min_div if rep else None,
            },
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _cut_cells(net: GridNetwork, f: Flow, shape) -> np.ndarray:
    cut = min_cut(net, f)
    nodes = np.fromiter((v for v in cut.nodes if v < net.n_cells), dtype=np.int64)
    sel = np.zeros(shape, dtype=bool)
    if nodes.size:
        c = net.cells[nodes]
        sel[c[:, 0], c[:, 1]] = True
    return sel


def cheeger_set_polygons(g: GridDomain, cells: np.ndarray, smoothing: float = 1.0) -> list[Polygon]:
    """Best polygonal component of a cell set, by quotient.

    The blurred contour is tried first; tiny sets that vanish under the blur
    fall back to the raw marching-squares outline.
    """
    comps = geometry.cut_set_to_polygons(g, cells, smoothing=smoothing, clip=True)
    if not comps:
        comps = geometry.cut_set_to_polygons(g, cells, smoothing=0.0, clip=True)
    if not comps:
        return []
    return [min(comps, key=geometry.quotient)]


def cheeger_constant(g: GridDomain, stencil="8", tol_h: float = 0.01,
                     smoothing: float = 1.0, cert_tol: float = 0.05,
                     max_iter: int = 100) -> CheegerResult:
    """Bracket the Cheeger constant of ``g`` by bisection on feasibility.

    The search starts on ``[0, 4 / rho]`` with ``rho`` the grid inradius;
    if the upper end is still feasible it is doubled once before giving up
    with :class:`BracketError`.
    """
    if not tol_h > 0:
        raise ValueError("tol_h must be positive")
    st = get_stencil(stencil)
    base = build_grid_network(g, 0.0, st)
    rho = inradius(grid_distance(g), refine=True)
    lo, hi = 0.0, 4.0 / max(rho, 0.5 * g.cell_size)
    it = 0
    best_f = None
    hi_state = None
    for attempt in range(2):
        net = base.with_h(hi)
        ok, f, _ = _solve(net)
        it += 1
        if not ok:
            hi_state = (net, f)
            break
        lo, best_f = hi, (net, f)
        hi *= 2
    if hi_state is None:
        raise BracketError(f"still feasible at h = {lo:g} after widening the bracket")
    while hi - lo > tol_h and it < max_iter:
        mid = 0.5 * (lo + hi)
        net = base.with_h(mid)
        ok, f, _ = _solve(net)
        it += 1
        if ok:
            lo, best_f = mid, (net, f)
        else:
            hi, hi_state = mid, (net, f)

    if best_f is None:
        net0 = base.with_h(0.0)
        best_f = (net0, Flow(np.zeros(net0.m)))
    net_lo, f_lo = best_f
    check_feasible(net_lo, f_lo)
    V = flow_to_vector_field(net_lo, f_lo, g)
    report = certify_lower_bound(V, g, lo, cert_tol)

    net_hi, f_hi = hi_state
    cells = _cut_cells(net_hi, f_hi, g.dims)
    if not cells.any():
        # an empty source side means the cut is the source arcs alone; use the
        # cells whose production could not be shipped
        cells = g.mask.copy()
    polys = cheeger_set_polygons(g, cells, smoothing)
    h_upper = geometry.quotient(polys) if polys else math.inf
    return CheegerResult(
        h_lower=float(lo), h_upper=float(h_upper), cheeger_set=tuple(polys), certificate=V,
        iterations=it, resolution=g.resolution, stencil=st.name, cut_cells=cells,
        h_infeasible=float(hi), certificate_report=report,
    )


# ---------------------------------------------------------------------------
# dual quotient


def _signed_contour_stats(field_: np.ndarray, level: float, dx: float) -> tuple[float, float]:
    """Total length and enclosed area of the ``{field > level}`` contour."""
    L = 0.0
    A = 0.0
    for c in measure.find_contours(field_, level, fully_connected="high", positive_orientation="high"):
        seg = np.diff(c, axis=0)
        L += float(np.hypot(seg[:, 0], seg[:, 1]).sum())
        x, y = c[:, 0], c[:, 1]
        A += 0.5 * float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))
    return L * dx, A * dx * dx


def quotient_of_candidate(phi: ScalarField, g: GridDomain | None = None,
                          n_levels: int = 64) -> tuple[float, float, float]:
    """Dual quotient ``Q(phi) = TV(phi) / int(phi)`` and its best level set.

    Total variation is the coarea integral of marching-squares contour
    lengths over ``n_levels`` midpoint levels. The sweep returns the level
    ``t`` whose superlevel set ``{phi > t}`` has the smallest length/area
    ratio; by the coarea argument that ratio never exceeds ``Q(phi)``.
    """
    g = phi.grid if g is None else g
    u = np.where(g.mask, np.asarray(phi.values, dtype=float), 0.0)
    if np.any(u < 0):
        raise DomainError("candidate must be nonnegative")
    top = float(u.max())
    if top <= 0:
        raise DomainError("candidate is identically zero")
    if n_levels < 1:
        raise ValueError("n_levels must be positive")
    dx = g.cell_size
    dt = top / n_levels
    levels = (np.arange(n_levels) + 0.5) * dt
    tv = 0.0
    best_t, best_q = math.nan, math.inf
    for t in levels:
        L, A = _signed_contour_stats(u, t, dx)
        tv += L * dt
        if A > 0 and L / A < best_q:
            best_t, best_q = float(t), L / A
    Q = tv / (dx * dx * u.sum())
    if best_q > Q * (1 + 1e-9) + 1e-12:
        raise AssertionError(f"level-set sweep {best_q} exceeds the dual quotient {Q}")
    return float(Q), best_t, float(best_q)


# ---------------------------------------------------------------------------
# random test subsets


@dataclass(frozen=True)
class SubdomainReport:
    bound: float
    tol: float
    quotients: tuple[float, ...]
    polygons: tuple[tuple[Polygon, ...], ...] = ()

    @property
    def min_quotient(self) -> float:
        return min(self.quotients)

    @property
    def min_margin(self) -> float:
        return self.min_quotient - self.bound

    @property
    def holds(self) -> bool:
        return self.min_margin >= -self.tol

    def check(self) -> InequalityCheck:
        return InequalityCheck("subdomain_quotient", self.min_quotient, self.bound, self.tol)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "tol": self.tol, "samples": len(self.quotients),
                "min_quotient": self.min_quotient, "min_margin": self.min_margin,
                "holds": self.holds}


def domain_rho(g: GridDomain) -> float:
    """Inradius from the exact polygon when known, else the refined grid value."""
    if g.polygon is not None:
        return polygon_inradius(g.polygon)
    return inradius(grid_distance(g), refine=True)


def domain_area(g: GridDomain) -> float:
    return geometry.area(g.polygon) if g.polygon is not None else geometry.grid_area(g)


def subdomain_bound_suite(g: GridDomain, samples: int = 32, seed: int = 0,
                          tol: float | None = None, keep_polygons: bool = False) -> SubdomainReport:
    """Check ``|dS| / |S| >= 1 / rho~`` on random subsets of the domain.

    Sample 0 is the domain itself; the rest are unions of one to four
    random disks centred in the domain, cut to the mask and hole-filled.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    rho = domain_rho(g)
    rt = reduced_inradius(rho, domain_area(g))
    bound = 1.0 / rt
    tol = grid_tolerance(bound, g.resolution) if tol is None else tol
    rng = np.random.default_rng(seed)
    X, Y = g.coords()
    inside = np.argwhere(g.mask)
    qs: list[float] = []
    kept = []
    whole = [g.polygon] if g.polygon is not None else geometry.mask_outline(g)
    qs.append(geometry.quotient(whole))
    kept.append(tuple(whole))
    tries = 0
    while len(qs) < samples and tries < 20 * samples:
        tries += 1
        sel = np.zeros_like(g.mask)
        for _ in range(int(rng.integers(1, 5))):
            ci = inside[rng.integers(len(inside))]
            cx, cy = X[tuple(ci)], Y[tuple(ci)]
            r = rng.uniform(0.1, 1.5) * rho
            sel |= (X - cx) ** 2 + (Y - cy) ** 2 < r * r
        sel &= g.mask
        sel = ndimage.binary_fill_holes(sel)
        polys = geometry.cut_set_to_polygons(g, sel, clip=True)
        if not polys:
            continue
        qs.append(geometry.quotient(polys))
        kept.append(tuple(polys))
    return SubdomainReport(bound, tol, tuple(qs), tuple(kept) if keep_polygons else ())


def sampled_quotients(polys: Sequence[Sequence[Polygon]]) -> list[float]:
    return [geometry.quotient(list(p)) for p in polys if p]
