"""Full analysis of one domain, its JSON report, CSV fields and SVG picture."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely

from . import geometry
from .cheeger import (
    CheegerResult,
    cheeger_constant,
    domain_rho,
    subdomain_bound_suite,
)
from .checks import InequalityCheck
from .distance_field import (
    VectorField,
    bonnesen_check,
    coarea_check,
    divergence_integral,
    finalest_check,
    grid_distance,
    makai_field,
    reduced_inradius,
)
from .errors import InvalidDomainError
from .geometry import DomainSpec, GridDomain, Polygon
from .spectral import EigenResult, assemble, check_cheeger_inequality, check_makai, smallest_eigenvalue

__all__ = [
    "AnalysisReport",
    "analyze",
    "write_field_csv",
    "read_field_csv",
    "render_svg",
    "COAREA_TOL",
    "DIVINT_REL_TOL",
    "CONVEX_REL_TOL",
]

COAREA_TOL = 0.03
DIVINT_REL_TOL = 0.05
CONVEX_REL_TOL = 0.05


@dataclass(eq=True)
class AnalysisReport:
    """Everything computed for one domain. Every verdict is an :class:`InequalityCheck`."""

    domain: dict
    geometry: dict
    cheeger: dict
    spectral: dict
    certificate: dict
    checks: dict[str, InequalityCheck]
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.holds]

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "geometry": self.geometry,
            "cheeger": self.cheeger,
            "spectral": self.spectral,
            "certificate": self.certificate,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
            "timings": self.timings,
            "passed": self.passed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        checks = {
            k: InequalityCheck(c["name"], c["lhs"], c["rhs"], c["tol"], c["relation"])
            for k, c in d["checks"].items()
        }
        return cls(d["domain"], d["geometry"], d["cheeger"], d["spectral"], d["certificate"],
                   checks, d.get("timings", {}))

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _is_convex(p: Polygon | None) -> bool:
    if p is None:
        return False
    shp = p.to_shapely()
    return math.isclose(shp.convex_hull.area, shp.area, rel_tol=1e-9)


def analyze(
    spec: DomainSpec,
    resolution: int | None = None,
    stencil: str = "8",
    tol_h: float = 0.01,
    levels: int = 64,
    cert_tol: float = 0.05,
    samples: int = 32,
    seed: int = 0,
    keep: dict | None = None,
) -> AnalysisReport:
    """Run every module on ``spec`` and collect the inequality verdicts.

    ``keep``, if given, receives the heavy intermediate objects (grids,
    Cheeger result, eigenpair, fields) for rendering.
    """
    if resolution is not None and spec.kind != "raster":
        spec = spec.with_resolution(resolution)
    timings = {}
    t0 = time.perf_counter()

    def lap(name):
        nonlocal t0
        t1 = time.perf_counter()
        timings[name] = round(t1 - t0, 4)
        t0 = t1

    g = geometry.rasterize(spec, "cell")
    poly = g.polygon
    area_ = geometry.area(poly) if poly is not None else geometry.grid_area(g)
    outline = [poly] if poly is not None else geometry.mask_outline(g)
    perim = geometry.perimeter(outline)
    rho = domain_rho(g)
    rt = reduced_inradius(rho, area_)
    phi = grid_distance(g)
    lap("geometry")

    ch: CheegerResult = cheeger_constant(g, stencil, tol_h, cert_tol=cert_tol)
    lap("cheeger")

    gs = geometry.rasterize(spec, "node") if spec.kind != "raster" else g
    eig: EigenResult = smallest_eigenvalue(assemble(gs))
    lap("spectral")

    checks: dict[str, InequalityCheck] = {}
    checks["cheeger_ineq"] = check_cheeger_inequality(eig.eigenvalue, ch.h_lower)
    checks["makai"] = check_makai(eig.eigenvalue, rt)
    checks["bracket"] = InequalityCheck("bracket", ch.h_upper, ch.h_lower, 0.0)
    if len(outline) == 1:
        checks["bonnesen"] = bonnesen_check(outline[0], rho if poly is not None else None)
    defect = coarea_check(phi, g, levels, rho)
    checks["coarea_defect"] = InequalityCheck("coarea_defect", defect, 0.0, COAREA_TOL, "<=")
    checks["finalest"] = finalest_check(phi, g, rho, levels)
    V = makai_field(phi, rho)
    divint = divergence_integral(V, g)
    bound = area_ / rt
    checks["makai_divergence"] = InequalityCheck("makai_divergence", divint, bound, DIVINT_REL_TOL * bound)
    if _is_convex(poly):
        checks["cheeger_vs_inradius"] = InequalityCheck(
            "cheeger_vs_inradius", ch.h_lower, 1 / rt, CONVEX_REL_TOL / rt
        )
    lap("checks")

    cert = ch.certificate_report
    checks["certificate_speed"] = InequalityCheck("certificate_speed", cert.max_speed, 1.0, cert.tol, "<=")
    checks["certificate_divergence"] = InequalityCheck(
        "certificate_divergence", cert.min_div, cert.h_claimed, cert.tol
    )
    suite = subdomain_bound_suite(g, samples, seed)
    checks["subdomain_quotient"] = suite.check()
    if cert.verdict:
        lowest = min(suite.min_quotient, ch.h_upper)
        checks["certificate_soundness"] = InequalityCheck(
            "certificate_soundness", lowest, cert.h_claimed, 2 * cert.tol
        )
    lap("subsets")

    if keep is not None:
        keep.update(grid=g, spectral_grid=gs, cheeger=ch, eigen=eig, phi=phi, makai=V, suite=suite)

    return AnalysisReport(
        domain={**spec.to_dict(), "alignment": "cell", "spectral_alignment": "node" if gs is not g else "cell",
                "cell_size": g.cell_size, "n_cells": g.n_cells},
        geometry={"area": area_, "perimeter": perim, "rho": rho, "rho_tilde": rt,
                  "grid_area": geometry.grid_area(g), "convex": _is_convex(poly)},
        cheeger={"h_lower": ch.h_lower, "h_upper": ch.h_upper, "gap": ch.gap, "iterations": ch.iterations,
                 "stencil": ch.stencil, "tol_h": tol_h,
                 "cheeger_set": [p.vertices.tolist() for p in ch.cheeger_set]},
        spectral={"lambda": eig.eigenvalue, "residual": eig.residual, "iterations": eig.iterations},
        certificate=cert.to_dict(),
        checks=checks,
        timings=timings,
    )


# ---------------------------------------------------------------------------
# CSV fields


def write_field_csv(V: VectorField, path) -> None:
    """One row per interior cell: ``i, j, x, y, vx, vy``."""
    g = V.grid
    X, Y = g.coords()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", "vx", "vy"])
        for i, j in np.argwhere(g.mask):
            w.writerow([i, j, repr(float(X[i, j])), repr(float(Y[i, j])),
                        repr(float(V.vx[i, j])), repr(float(V.vy[i, j]))])


def write_scalar_csv(g: GridDomain, values, path, name="u") -> None:
    X, Y = g.coords()
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", name])
        for i, j in np.argwhere(g.mask):
            w.writerow([i, j, repr(float(X[i, j])), repr(float(Y[i, j])), repr(float(values[i, j]))])


def read_field_csv(path, g: GridDomain) -> VectorField:
    """Inverse of :func:`write_field_csv`; every interior cell must be present."""
    vx = np.zeros(g.dims)
    vy = np.zeros(g.dims)
    seen = np.zeros(g.dims, dtype=bool)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        for r in rows:
            i, j = int(r["i"]), int(r["j"])
            if not (0 <= i < g.dims[0] and 0 <= j < g.dims[1]):
                raise InvalidDomainError(f"cell ({i}, {j}) outside the {g.dims} grid")
            vx[i, j], vy[i, j] = float(r["vx"]), float(r["vy"])
            seen[i, j] = True
    except (KeyError, ValueError, TypeError) as exc:
        raise InvalidDomainError(f"{path}: malformed field CSV ({exc})") from exc
    missing = int((g.mask & ~seen).sum())
    if missing:
        raise InvalidDomainError(f"{path}: field misses {missing} interior cells of the {g.dims} grid")
    return VectorField(g, vx, vy)


# ---------------------------------------------------------------------------
# SVG


def _path(polys, tf) -> str:
    parts = []
    for p in polys:
        pts = [tf(x, y) for x, y in p.vertices]
        parts.append("M" + " L".join(f"{a:.2f},{b:.2f}" for a, b in pts) + " Z")
    return " ".join(parts)


def render_svg(keep: dict, size: int = 480) -> str:
    """Outline, Cheeger set, certificate arrows and eigenfunction heatmap."""
    g: GridDomain = keep["grid"]
    ch: CheegerResult = keep["cheeger"]
    eig = keep["eigen"]
    gs: GridDomain = keep["spectral_grid"]
    outline = [g.polygon] if g.polygon is not None else geometry.mask_outline(g)
    xmin, ymin, xmax, ymax = shapely.MultiPolygon([p.to_shapely() for p in outline]).bounds
    span = max(xmax - xmin, ymax - ymin)
    pad = 10
    s = (size - 2 * pad) / span
    H = (ymax - ymin) * s + 2 * pad
    W = (xmax - xmin) * s + 2 * pad

    def tf(x, y):
        return pad + (x - xmin) * s, H - pad - (y - ymin) * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
           f'viewBox="0 0 {W:.1f} {H:.1f}">', '<rect width="100%" height="100%" fill="white"/>']

    # heatmap, block-averaged down to at most 64 cells across
    u = np.asarray(eig.eigenfunction.values)
    step = max(1, int(np.ceil(max(u.shape) / 64)))
    umax = float(u.max()) or 1.0
    X, Y = gs.coords()
    d = gs.cell_size * step
    for i in range(0, u.shape[0], step):
        for j in range(0, u.shape[1], step):
            m = gs.mask[i:i + step, j:j + step]
            if not m.any():
                continue
            val = float(u[i:i + step, j:j + step][m].mean()) / umax
            x0, y1 = tf(X[i, j] - gs.cell_size / 2, Y[i, j] - gs.cell_size / 2 + d)
            c = int(255 * (1 - 0.8 * max(0.0, min(1.0, val))))
            out.append(f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{d * s:.2f}" height="{d * s:.2f}" '
                       f'fill="rgb(255,{c},{c})" stroke="none"/>')

    out.append(f'<path d="{_path(outline, tf)}" fill="none" stroke="black" stroke-width="1.5"/>')
    if ch.cheeger_set:
        out.append(f'<path d="{_path(ch.cheeger_set, tf)}" fill="none" stroke="royalblue" '
                   f'stroke-width="1.5" stroke-dasharray="5,3"/>')

    V = ch.certificate
    Xc, Yc = g.coords()
    k = max(1, int(np.ceil(max(g.dims) / 24)))
    arrow = 0.8 * k * g.cell_size
    for i in range(k // 2, g.dims[0], k):
        for j in range(k // 2, g.dims[1], k):
            if not g.mask[i, j]:
                continue
            x, y = Xc[i, j], Yc[i, j]
            a, b = tf(x, y)
            c2, d2 = tf(x + arrow * V.vx[i, j], y + arrow * V.vy[i, j])
            out.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c2:.2f}" y2="{d2:.2f}" '
                       f'stroke="darkgreen" stroke-width="0.8"/>')
            out.append(f'<circle cx="{c2:.2f}" cy="{d2:.2f}" r="1.2" fill="darkgreen"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(report: AnalysisReport, keep: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": report.to_json(indent=2),
        "analysis.svg": render_svg(keep),
    }
    written = []
    for name, text in files.items():
        (out / name).write_text(text)
        written.append(out / name)
    write_field_csv(keep["cheeger"].certificate, out / "certificate.csv")
    write_field_csv(keep["makai"], out / "makai_field.csv")
    write_scalar_csv(keep["spectral_grid"], keep["eigen"].eigenfunction.values, out / "eigenfunction.csv")
    written += [out / "certificate.csv", out / "makai_field.csv", out / "eigenfunction.csv"]
    return written
