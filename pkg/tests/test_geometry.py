import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheegerflow import geometry
from cheegerflow.errors import InvalidDomainError, ResolutionTooCoarseError
from cheegerflow.geometry import DomainSpec, Polygon, area, perimeter, quotient, rasterize, regular_polygon

from conftest import spec_grid

SQUARE = Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
TRIANGLE = Polygon([(0, 0), (1, 0), (0, 1)])


def star_polygon(radii, phase=0.0):
    n = len(radii)
    t = phase + 2 * np.pi * np.arange(n) / n
    return Polygon(np.c_[radii * np.cos(t), radii * np.sin(t)])


star_radii = st.lists(st.floats(0.2, 1.0), min_size=3, max_size=40).map(np.array)


class TestPolygon:
    def test_clockwise_input_is_reoriented(self):
        p = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert geometry._signed_area(p.vertices) > 0

    def test_closing_vertex_dropped(self):
        assert len(Polygon([(0, 0), (1, 0), (1, 1), (0, 0)])) == 3

    def test_self_intersection_rejected(self):
        with pytest.raises(InvalidDomainError):
            Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])

    @pytest.mark.parametrize("verts", [[(0, 0), (1, 1), (2, 2)], [(0, 0), (1, 0)]])
    def test_degenerate_rejected(self, verts):
        with pytest.raises(InvalidDomainError):
            Polygon(verts)

    def test_vertices_are_read_only(self):
        with pytest.raises(ValueError):
            SQUARE.vertices[0, 0] = 5.0


class TestMeasures:
    def test_square(self):
        assert area(SQUARE) == 1.0
        assert perimeter(SQUARE) == 4.0
        assert quotient(SQUARE) == 4.0

    def test_triangle(self):
        assert area(TRIANGLE) == pytest.approx(0.5)
        assert perimeter(TRIANGLE) == pytest.approx(2 + math.sqrt(2))

    def test_regular_256_gon(self):
        p = regular_polygon(256)
        n = 256
        assert area(p) == pytest.approx(n / 2 * math.sin(2 * math.pi / n), rel=1e-12)
        assert abs(area(p) - math.pi) < 1e-3
        assert perimeter(p) == pytest.approx(n * 2 * math.sin(math.pi / n), rel=1e-12)
        assert abs(perimeter(p) - 2 * math.pi) < 1e-3
        assert abs(quotient(p) - 2) < 2e-3

    def test_radius_two_disk(self):
        assert abs(quotient(regular_polygon(512, 2.0)) - 1) < 1e-2

    def test_sequence_sums(self):
        two = [SQUARE, SQUARE.translated(3, 0)]
        assert area(two) == 2.0
        assert quotient(two) == 4.0

    def test_empty_sequence(self):
        with pytest.raises(InvalidDomainError):
            quotient([])


@settings(max_examples=60, deadline=None)
@given(star_radii, st.floats(0.1, 10.0))
def test_quotient_scaling(radii, r):
    p = star_polygon(radii)
    assert quotient(p.scaled(r)) == pytest.approx(quotient(p) / r, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(star_radii, st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 2 * np.pi))
def test_rigid_motion_invariance(radii, dx, dy, angle):
    p = star_polygon(radii)
    q = p.rotated(angle, about=(0.3, -0.2)).translated(dx, dy)
    assert area(q) == pytest.approx(area(p), rel=1e-12)
    assert perimeter(q) == pytest.approx(perimeter(p), rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(star_radii, st.floats(0, 1))
def test_isoperimetric(radii, phase):
    p = star_polygon(radii, phase)
    assert quotient(p) >= 2 * math.sqrt(math.pi / area(p)) * (1 - 1e-12)


class TestDomainSpec:
    def test_round_trip(self):
        for d in [
            {"kind": "disk", "r": 1.5, "center": [0.5, 0.0], "resolution": 64},
            {"kind": "rectangle", "w": 2.0, "h": 1.0, "resolution": 32},
            {"kind": "l_shape", "w": 2.0, "h": 2.0, "notch": 1.0, "resolution": 32},
            {"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]], "resolution": 32},
            {"kind": "raster", "mask": [[1, 1], [0, 1]], "cell_size": 0.5, "resolution": 16},
        ]:
            spec = DomainSpec.from_dict(d)
            again = DomainSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
            assert again.to_dict() == spec.to_dict()

    @pytest.mark.parametrize("d", [
        {"kind": "disk"},
        {"kind": "blob", "r": 1},
        {"kind": "disk", "r": -1},
        {"kind": "disk", "r": 1, "resolution": 8},
        {"kind": "l_shape", "w": 1, "h": 1, "notch": 2},
        {"kind": "rectangle", "w": 1, "h": 1, "colour": "red"},
        [1, 2, 3],
    ])
    def test_invalid(self, d):
        with pytest.raises(InvalidDomainError):
            DomainSpec.from_dict(d)

    def test_load_malformed(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(InvalidDomainError):
            DomainSpec.load(p)

    def test_l_shape_polygon(self):
        p = DomainSpec.from_dict({"kind": "l_shape", "w": 2, "h": 2, "notch": 1}).polygon()
        assert area(p) == 3.0
        assert perimeter(p) == 8.0


class TestRasterize:
    def test_disk_area(self):
        g = spec_grid(64, kind="disk", r=1.0)
        assert abs(g.n_cells * g.cell_size**2 - math.pi) < 0.05 * math.pi

    def test_square_block(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        assert g.dims == (34, 34)
        assert g.mask[1:-1, 1:-1].all() and g.n_cells == 32 * 32
        assert geometry.grid_area(g) == pytest.approx(1.0)

    def test_border_is_false(self):
        g = spec_grid(40, kind="l_shape", w=2, h=2, notch=1)
        m = g.mask
        assert not (m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any())

    def test_node_alignment_puts_centres_on_walls(self):
        g = spec_grid(32, "node", kind="rectangle", w=1, h=1)
        X, _ = g.coords()
        assert np.isclose(X[1, 0], 0.0) and not g.mask[1].any()
        assert g.n_cells == 31 * 31

    def test_disk_area_converges(self):
        errs = [abs(geometry.grid_area(spec_grid(r, kind="disk", r=1.0)) - math.pi) for r in (64, 256)]
        assert errs[1] < math.pi * 0.01
        assert errs[1] < errs[0]

    def test_too_coarse(self):
        spec = DomainSpec.from_dict({"kind": "polygon", "resolution": 16,
                                     "vertices": [[0, 0], [1, 0], [1, 0.001]]})
        with pytest.raises(ResolutionTooCoarseError):
            rasterize(spec)

    def test_degenerate_segment(self):
        with pytest.raises(InvalidDomainError):
            DomainSpec.from_dict({"kind": "polygon", "vertices": [[0, 0], [1, 1], [2, 2]]}).polygon()

    def test_raster_spec(self):
        spec = DomainSpec.from_dict({"kind": "raster", "mask": [[1, 1], [1, 0]], "cell_size": 0.25})
        g = rasterize(spec)
        assert g.dims == (4, 4) and g.n_cells == 3 and g.polygon is None


class TestCutSets:
    def test_full_square(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        polys = geometry.cut_set_to_polygons(g, g.mask)
        assert len(polys) == 1
        assert abs(quotient(polys) - 4) < 0.4

    def test_single_cell_is_midpoint_diamond(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        sel = np.zeros(g.dims, bool)
        sel[10, 10] = True
        polys = geometry.cut_set_to_polygons(g, sel)
        assert len(polys) == 1
        # vertices at the four edge midpoints: side dx/sqrt2
        assert quotient(polys) == pytest.approx(4 * math.sqrt(2) / g.cell_size)

    def test_two_blobs(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        sel = np.zeros(g.dims, bool)
        sel[3:8, 3:8] = True
        sel[20:25, 20:25] = True
        assert len(geometry.cut_set_to_polygons(g, sel)) == 2

    def test_empty(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        assert geometry.cut_set_to_polygons(g, np.zeros(g.dims, bool)) == []

    def test_holes_filled(self):
        g = spec_grid(32, kind="rectangle", w=1, h=1)
        sel = np.zeros(g.dims, bool)
        sel[5:20, 5:20] = True
        sel[10:14, 10:14] = False
        polys = geometry.cut_set_to_polygons(g, sel)
        assert len(polys) == 1
        assert area(polys) > 14 * 14 * g.cell_size**2

    def test_smoothed_clipped_disk_is_accurate(self):
        g = spec_grid(128, kind="disk", r=1.0)
        raw = quotient(geometry.cut_set_to_polygons(g, g.mask))
        smooth = quotient(geometry.cut_set_to_polygons(g, g.mask, smoothing=1.0, clip=True))
        assert abs(smooth - 2) < 0.02
        assert raw > smooth

    def test_outline_area_converges(self):
        errs = []
        for res in (32, 128):
            g = spec_grid(res, kind="disk", r=1.0)
            errs.append(abs(area(geometry.mask_outline(g)) - math.pi))
        assert errs[1] < errs[0] / 2
