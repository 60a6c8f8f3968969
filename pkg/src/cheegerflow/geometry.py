"""Polygonal domains, rasterization to cell grids, and perimeter/area measures.

Grid convention: ``mask[i, j]`` refers to the cell whose center sits at
``origin + (i, j) * cell_size``; axis 0 runs along x, axis 1 along y.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import shapely
from scipy import ndimage
from skimage import measure

from .errors import InvalidDomainError, ResolutionTooCoarseError

__all__ = [
    "Polygon",
    "GridDomain",
    "DomainSpec",
    "regular_polygon",
    "area",
    "perimeter",
    "quotient",
    "rasterize",
    "grid_area",
    "cut_set_to_polygons",
    "mask_outline",
]

DISK_SIDES = 1024


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon with counterclockwise vertex order.

    Clockwise input is reversed, a repeated closing vertex is dropped.
    """

    vertices: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidDomainError("vertices must be an (n, 2) array")
        if len(v) > 1 and np.allclose(v[0], v[-1], rtol=0, atol=1e-14):
            v = v[:-1]
        if len(v) < 3:
            raise InvalidDomainError(f"polygon needs at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise InvalidDomainError("non-finite vertex coordinates")
        a = _signed_area(v)
        scale = float(np.ptp(v, axis=0).max()) or 1.0
        if abs(a) <= 1e-14 * scale * scale:
            raise InvalidDomainError("degenerate polygon (zero area)")
        if a < 0:
            v = v[::-1].copy()
        if self.validate and not shapely.LinearRing(v).is_simple:
            raise InvalidDomainError("polygon is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every edge."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def to_shapely(self) -> shapely.Polygon:
        return shapely.Polygon(self.vertices)

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon(self.vertices + np.array([dx, dy]), validate=False)

    def rotated(self, angle: float, about=(0.0, 0.0)) -> "Polygon":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        p = np.asarray(about, dtype=float)
        return Polygon((self.vertices - p) @ rot.T + p, validate=False)

    def scaled(self, r: float) -> "Polygon":
        return Polygon(self.vertices * r, validate=False)

    def contains(self, x, y) -> np.ndarray:
        """Strict interior test; points on the boundary count as outside."""
        return shapely.contains_xy(self.to_shapely(), np.asarray(x, float), np.asarray(y, float))


def regular_polygon(n: int, r: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> Polygon:
    """Regular ``n``-gon inscribed in the circle of radius ``r``."""
    t = phase + 2 * np.pi * np.arange(n) / n
    v = np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)])
    return Polygon(v, validate=False)


PolygonLike = Union[Polygon, Sequence[Polygon]]


def _as_list(p: PolygonLike) -> list[Polygon]:
    if isinstance(p, Polygon):
        return [p]
    return list(p)


def area(p: PolygonLike) -> float:
    """Shoelace area; sums over a sequence of polygons."""
    return float(sum(_signed_area(q.vertices) for q in _as_list(p)))


def perimeter(p: PolygonLike) -> float:
    total = 0.0
    for q in _as_list(p):
        a, b = q.edges
        total += float(np.hypot(*(b - a).T).sum())
    return total


def quotient(p: PolygonLike) -> float:
    """Boundary length over enclosed area.

    For any set contained in a domain this is an upper bound on the
    domain's Cheeger constant.
    """
    polys = _as_list(p)
    if not polys:
        raise InvalidDomainError("empty polygon sequence")
    a = area(polys)
    if a <= 0:
        raise InvalidDomainError("zero area")
    return perimeter(polys) / a


# ---------------------------------------------------------------------------
# Domain descriptions


_KINDS = ("polygon", "disk", "rectangle", "l_shape", "raster")
_KIND_FIELDS = {
    "polygon": ("vertices",),
    "disk": ("r", "center"),
    "rectangle": ("w", "h", "center"),
    "l_shape": ("w", "h", "notch", "center"),
    "raster": ("mask", "cell_size"),
}


@dataclass(frozen=True)
class DomainSpec:
    """Description of a planar domain plus the requested grid resolution.

    ``resolution`` counts cells across the longer side of the bounding box.
    For ``l_shape`` the notch (side ``notch``) is cut from the top-right
    corner of the ``w`` by ``h`` rectangle.
    """

    kind: str
    resolution: int = 128
    vertices: tuple | None = None
    center: tuple | None = None
    r: float | None = None
    w: float | None = None
    h: float | None = None
    notch: float | None = None
    mask: np.ndarray | None = field(default=None, compare=False, repr=False)
    cell_size: float | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidDomainError(f"unknown domain kind {self.kind!r}")
        if int(self.resolution) < 16:
            raise InvalidDomainError("resolution must be at least 16")
        need = {
            "polygon": ("vertices",),
            "disk": ("r",),
            "rectangle": ("w", "h"),
            "l_shape": ("w", "h", "notch"),
            "raster": ("mask", "cell_size"),
        }[self.kind]
        for key in need:
            if getattr(self, key) is None:
                raise InvalidDomainError(f"{self.kind} spec requires {key!r}")
        for key in ("r", "w", "h", "notch", "cell_size"):
            val = getattr(self, key)
            if val is not None and not (val > 0 and math.isfinite(val)):
                raise InvalidDomainError(f"{key} must be positive, got {val}")
        if self.kind == "l_shape" and not (self.notch < self.w and self.notch < self.h):
            raise InvalidDomainError("notch must be smaller than both sides")

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidDomainError("domain spec must be an object with a 'kind' field")
        allowed = {"kind", "resolution", "name"} | set(_KIND_FIELDS.get(d["kind"], ()))
        extra = sorted(set(d) - allowed)
        if extra:
            raise InvalidDomainError(f"unexpected field(s) for {d['kind']!r} spec: {', '.join(extra)}")
        kw = {k: d[k] for k in ("kind", "resolution", "r", "w", "h", "notch", "cell_size", "name") if k in d}
        if "mask" in d:
            kw["mask"] = np.asarray(d["mask"], dtype=bool)
        if "vertices" in d:
            kw["vertices"] = tuple(tuple(map(float, v)) for v in d["vertices"])
        if "center" in d:
            kw["center"] = tuple(map(float, d["center"]))
        try:
            return cls(**kw)
        except TypeError as exc:
            raise InvalidDomainError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "DomainSpec":
        text = Path(path).read_text()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidDomainError(f"{path}: {exc}") from exc
        d.setdefault("name", Path(path).stem)
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "resolution": int(self.resolution)}
        for key in ("r", "w", "h", "notch", "cell_size", "name"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.mask is not None:
            d["mask"] = np.asarray(self.mask, dtype=int).tolist()
        if self.vertices is not None:
            d["vertices"] = [list(v) for v in self.vertices]
        if self.center is not None:
            d["center"] = list(self.center)
        return d

    def with_resolution(self, resolution: int) -> "DomainSpec":
        d = self.to_dict()
        d["resolution"] = resolution
        if self.kind == "raster":
            raise InvalidDomainError("raster specs have a fixed resolution")
        return DomainSpec.from_dict(d)

    @property
    def is_disk(self) -> bool:
        return self.kind == "disk"

    def polygon(self) -> Polygon | None:
        """Exact polygon (disks become an inscribed 1024-gon); ``None`` for rasters."""
        if self.kind == "polygon":
            return Polygon(np.array(self.vertices))
        if self.kind == "disk":
            return regular_polygon(DISK_SIDES, self.r, self.center or (0.0, 0.0))
        if self.kind == "rectangle":
            x0, y0 = self._corner()
            w, h = self.w, self.h
            return Polygon(np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]]))
        if self.kind == "l_shape":
            w, h, n = self.w, self.h, self.notch
            x0, y0 = self._corner()
            v = [(0, 0), (w, 0), (w, h - n), (w - n, h - n), (w - n, h), (0, h)]
            return Polygon(np.array(v, dtype=float) + [x0, y0])
        return None

    def _corner(self) -> tuple[float, float]:
        if self.center is None:
            return 0.0, 0.0
        return self.center[0] - self.w / 2, self.center[1] - self.h / 2

    def bbox(self) -> tuple[float, float, float, float]:
        if self.kind == "disk":
            cx, cy = self.center or (0.0, 0.0)
            return cx - self.r, cy - self.r, cx + self.r, cy + self.r
        if self.kind == "raster":
            nx, ny = np.asarray(self.mask).shape
            return 0.0, 0.0, nx * self.cell_size, ny * self.cell_size
        return self.polygon().bounds

    def inside(self, x, y) -> np.ndarray:
        """Strict membership test for points (ties count as outside)."""
        if self.kind == "disk":
            cx, cy = self.center or (0.0, 0.0)
            return (x - cx) ** 2 + (y - cy) ** 2 < self.r**2
        if self.kind == "rectangle":
            x0, y0 = self._corner()
            return (x > x0) & (x < x0 + self.w) & (y > y0) & (y < y0 + self.h)
        return self.polygon().contains(x, y)


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Rasterized domain: boolean cell mask on a uniform grid.

    ``polygon`` keeps the exact boundary when the grid came from one; it is
    used to clip extracted sets and to measure exact distances.
    """

    cell_size: float
    origin: tuple[float, float]
    mask: np.ndarray
    polygon: Polygon | None = None
    resolution: int | None = None
    name: str | None = None

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool).copy()
        if m.ndim != 2:
            raise InvalidDomainError("mask must be 2-D")
        if not self.cell_size > 0:
            raise InvalidDomainError("cell size must be positive")
        if not m.any():
            raise ResolutionTooCoarseError("grid has no interior cell")
        if m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any():
            raise InvalidDomainError("mask must have an all-false one-cell border")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def dims(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def n_cells(self) -> int:
        return int(self.mask.sum())

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates, each of shape ``dims``."""
        nx, ny = self.dims
        x = self.origin[0] + self.cell_size * np.arange(nx)
        y = self.origin[1] + self.cell_size * np.arange(ny)
        return np.meshgrid(x, y, indexing="ij")

    def index_to_xy(self, ij: np.ndarray) -> np.ndarray:
        """Map fractional array indices ``(i, j)`` to physical points."""
        ij = np.asarray(ij, dtype=float)
        return np.asarray(self.origin) + self.cell_size * ij

    def cell_index(self) -> np.ndarray:
        """Array holding the running index of each interior cell, -1 outside."""
        idx = np.full(self.dims, -1, dtype=np.int64)
        idx[self.mask] = np.arange(self.n_cells)
        return idx

    def with_mask(self, mask: np.ndarray) -> "GridDomain":
        return GridDomain(self.cell_size, self.origin, mask, None, self.resolution, self.name)


def rasterize(spec: DomainSpec, alignment: str = "cell") -> GridDomain:
    """Sample a domain on a grid with one padding cell on every side.

    ``alignment="cell"`` puts cell faces on the bounding box, so cells tile
    axis-aligned rectangles exactly. ``alignment="node"`` puts cell centers
    on the bounding box instead (centers on the boundary count as outside),
    which places the Dirichlet nodes of the Laplacian exactly on straight
    walls.
    """
    if spec.kind == "raster":
        mask = np.pad(np.asarray(spec.mask, dtype=bool), 1)
        if not mask.any():
            raise ResolutionTooCoarseError("raster mask is empty")
        return GridDomain(spec.cell_size, (-0.5 * spec.cell_size, -0.5 * spec.cell_size),
                          mask, None, spec.resolution, spec.name)
    if alignment not in ("cell", "node"):
        raise ValueError(f"unknown alignment {alignment!r}")
    poly = spec.polygon()
    xmin, ymin, xmax, ymax = spec.bbox()
    width, height = xmax - xmin, ymax - ymin
    if not (width > 0 and height > 0):
        raise InvalidDomainError("domain has an empty bounding box")
    res = int(spec.resolution)
    dx = max(width, height) / res
    pad = 1
    if alignment == "cell":
        counts = [math.ceil(width / dx - 1e-9), math.ceil(height / dx - 1e-9)]
        shift = 0.5
    else:
        counts = [math.floor(width / dx + 1e-9) + 1, math.floor(height / dx + 1e-9) + 1]
        shift = 0.0
    nx, ny = counts[0] + 2 * pad, counts[1] + 2 * pad
    origin = (xmin + (shift - pad) * dx, ymin + (shift - pad) * dx)
    x = origin[0] + dx * np.arange(nx)
    y = origin[1] + dx * np.arange(ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    mask = np.asarray(spec.inside(X, Y), dtype=bool)
    mask[0, :] = mask[-1, :] = False
    mask[:, 0] = mask[:, -1] = False
    if not mask.any():
        raise ResolutionTooCoarseError(f"no interior cell at resolution {res}")
    return GridDomain(dx, origin, mask, poly, res, spec.name)


def grid_area(g: GridDomain) -> float:
    return g.n_cells * g.cell_size**2


# ---------------------------------------------------------------------------
# Contours of cell sets


def _contour_polygons(g: GridDomain, field_: np.ndarray, level: float) -> list[Polygon]:
    out = []
    for c in measure.find_contours(field_, level, fully_connected="high"):
        if len(c) < 4:
            continue
        xy = g.index_to_xy(c)
        try:
            out.append(Polygon(xy, validate=False))
        except InvalidDomainError:
            continue
    return out


def _clip(polys: Iterable[Polygon], domain: Polygon) -> list[Polygon]:
    clip = domain.to_shapely()
    out = []
    for p in polys:
        shp = p.to_shapely()
        if not shp.is_valid:
            shp = shapely.make_valid(shp)
        inter = shp.intersection(clip)
        for part in getattr(inter, "geoms", [inter]):
            if isinstance(part, shapely.Polygon) and part.area > 0:
                try:
                    out.append(Polygon(np.asarray(part.exterior.coords), validate=False))
                except InvalidDomainError:
                    pass
    return out


def cut_set_to_polygons(
    g: GridDomain,
    selected: np.ndarray,
    smoothing: float = 0.0,
    clip: bool = False,
) -> list[Polygon]:
    """Polygonize a set of grid cells, one polygon per connected component.

    Holes are filled first. The contour is the 1/2-level marching-squares
    line of the cell indicator, whose vertices sit at midpoints between
    selected and unselected cell centers. ``smoothing`` (in cells) applies a
    Gaussian blur to the indicator before contouring, which removes the
    staircase overshoot of the raw contour on slanted boundaries.
    ``clip=True`` intersects the result with the exact domain polygon so
    every returned polygon is a genuine subset of the domain.
    """
    sel = np.asarray(selected, dtype=bool) & g.mask
    if not sel.any():
        return []
    sel = ndimage.binary_fill_holes(sel)
    labels, n = ndimage.label(sel, structure=np.ones((3, 3), dtype=bool))
    polys: list[Polygon] = []
    for k in range(1, n + 1):
        ind = (labels == k).astype(float)
        if smoothing > 0:
            ind = ndimage.gaussian_filter(ind, smoothing, mode="constant")
        polys.extend(_contour_polygons(g, ind, 0.5))
    if clip and g.polygon is not None:
        polys = _clip(polys, g.polygon)
    return polys


def mask_outline(g: GridDomain) -> list[Polygon]:
    """Marching-squares outline of the whole mask."""
    return cut_set_to_polygons(g, g.mask)
