import json
import math

import numpy as np
import pytest

from cheegerflow import geometry
from cheegerflow.cheeger import (
    STENCILS,
    _solve,
    build_grid_network,
    block_divergence,
    certify_lower_bound,
    cheeger_constant,
    feasible,
    flow_to_vector_field,
    get_stencil,
    quotient_of_candidate,
    subdomain_bound_suite,
)
from cheegerflow.distance_field import ScalarField, VectorField, grid_distance, makai_field
from cheegerflow.errors import DomainError
from cheegerflow.maxflow import check_feasible

from conftest import cheeger, grid, spec_grid


@pytest.fixture(scope="module")
def disk64():
    return spec_grid(64, kind="disk", r=1.0)


@pytest.fixture(scope="module")
def square32():
    return spec_grid(32, kind="rectangle", w=1, h=1)


def disk_fraction(g, r=1.0, center=(0.0, 0.0), sub=8):
    """Area fraction of each cell covered by the disk, by supersampling."""
    X, Y = g.coords()
    X, Y = X - center[0], Y - center[1]
    dx = g.cell_size
    off = (np.arange(sub) + 0.5) / sub - 0.5
    acc = np.zeros(g.dims)
    for a in off:
        for b in off:
            acc += (X + a * dx) ** 2 + (Y + b * dx) ** 2 < r * r
    return acc / sub**2


def rect_h(a, b):
    """Cheeger constant of an a-by-b rectangle (corners rounded off by arcs)."""
    return (4 - math.pi) / (a + b - math.sqrt((a - b) ** 2 + math.pi * a * b))


class TestStencil:
    def test_mean_metric(self):
        lo, mean, hi = STENCILS["8"].anisotropy()
        assert mean == pytest.approx(1.0, abs=1e-4)
        assert 0.89 < lo and hi < 1.04

    def test_axis_cut_is_exact(self):
        st = STENCILS["8"]
        assert st.metric(0.0) == pytest.approx(1.0)
        assert st.metric(math.pi / 2) == pytest.approx(1.0)

    def test_octagonal_exact_on_axes(self):
        st = STENCILS["8-octagonal"]
        assert st.metric(0.0) == pytest.approx(1.0)
        assert st.metric(math.pi / 4) == pytest.approx(1.0)

    def test_unknown(self):
        with pytest.raises(ValueError):
            get_stencil("6")


class TestNetwork:
    def test_single_cell(self):
        g = geometry.rasterize(geometry.DomainSpec.from_dict(
            {"kind": "raster", "mask": [[1]], "cell_size": 0.5}))
        net = build_grid_network(g, 1.0, "4")
        assert net.n == 3
        src = net.caps[net.arc_kind == 0]
        assert src.tolist() == [0.25]
        assert net.caps[net.arc_kind == 2].sum() == pytest.approx(4 * 0.5 * math.pi / 4)
        assert not np.any(net.arc_kind == 1)

    def test_square_source_total(self, square32):
        net = build_grid_network(square32, 1.0)
        assert net.caps[net.arc_kind == 0].sum() == pytest.approx(1.0)

    def test_sink_capacity_is_perimeter(self, square32):
        net = build_grid_network(square32, 1.0)
        assert net.caps[net.arc_kind == 2].sum() == pytest.approx(4.0, rel=0.1)

    def test_symmetric_interior_arcs(self, square32):
        net = build_grid_network(square32, 0.0)
        inner = net.arc_kind == 1
        pairs = set(zip(net.tails[inner].tolist(), net.heads[inner].tolist()))
        assert all((v, u) in pairs for u, v in pairs)

    def test_negative_h(self, square32):
        with pytest.raises(DomainError):
            build_grid_network(square32, -1.0)


class TestFeasibility:
    @pytest.mark.parametrize("h,ok", [(0.0, True), (1.5, True), (2.5, False)])
    def test_disk(self, disk64, h, ok):
        assert feasible(disk64, h) is ok

    def test_monotone(self, square32):
        hs = np.linspace(0, 6, 13)
        flags = [feasible(square32, h) for h in hs]
        # once infeasible, always infeasible
        first_bad = flags.index(False)
        assert not any(flags[first_bad:])

    def test_flow_is_feasible(self, disk64):
        net = build_grid_network(disk64, 1.8)
        ok, f, value = _solve(net)
        assert ok
        check_feasible(net, f)


class TestVectorField:
    def test_disk_radial(self):
        g = grid("disk", 128)
        res = cheeger("disk", 128)
        V = res.certificate
        X, Y = g.coords()
        k = np.unravel_index(np.argmin((X - 0.5) ** 2 + Y**2), X.shape)
        # the exact calibration is V = x, so V(0.5, 0) = (0.5, 0)
        assert abs(V.vx[k] - 0.5) < 0.15 and abs(V.vy[k]) < 0.15

    def test_zero_h(self, square32):
        net = build_grid_network(square32, 0.0)
        ok, f, _ = _solve(net)
        V = flow_to_vector_field(net, f, square32)
        assert not np.any(V.vx) and not np.any(V.vy)

    def test_block_divergence_is_h(self, disk64):
        net = build_grid_network(disk64, 1.7)
        ok, f, _ = _solve(net)
        for relax in (False, True):
            V = flow_to_vector_field(net, f, disk64, relax=relax)
            div, inside = block_divergence(V)
            assert np.allclose(div[inside], 1.7, atol=1e-8)

    def test_square_speed(self):
        res = cheeger("square", 128)
        assert res.certificate_report.max_speed <= 1.05


class TestCertify:
    def test_identity_field_on_disk(self, disk64):
        V = VectorField.from_function(disk64, lambda x, y: (x, y))
        assert certify_lower_bound(V, h_claimed=2.0).verdict
        rep = certify_lower_bound(V, h_claimed=2.2)
        assert not rep.verdict and "divergence" in rep.message()

    def test_speed_violation(self, disk64):
        V = VectorField.from_function(disk64, lambda x, y: (2 * x, 2 * y))
        rep = certify_lower_bound(V, h_claimed=1.0)
        assert not rep.verdict and not rep.speed_ok and "speed" in rep.message()

    def test_makai_field_fails_pointwise(self):
        g = spec_grid(64, kind="rectangle", w=1, h=1)
        V = makai_field(grid_distance(g), 0.5)
        rep = certify_lower_bound(V, h_claimed=3.52)
        assert not rep.verdict and "pointwise" in rep.message()

    def test_shape_mismatch(self, disk64, square32):
        V = VectorField.from_function(disk64, lambda x, y: (x, y))
        with pytest.raises(ValueError):
            certify_lower_bound(V, square32)

    def test_solver_certificates_pass(self):
        for name in ("disk", "square", "l_shape"):
            assert cheeger(name, 128).certificate_report.verdict


class TestCheegerConstant:
    @pytest.mark.parametrize("name,h", [("disk", 2.0), ("square", rect_h(1, 1)), ("rect_2x1", rect_h(2, 1))])
    def test_bracket_near_exact(self, name, h):
        res = cheeger(name, 128)
        assert res.h_lower <= res.h_upper
        assert res.h_lower <= h * 1.04 and res.h_upper >= h * 0.99
        assert res.gap < 0.15 * h

    def test_certificate_field_is_stored(self):
        res = cheeger("disk", 128)
        assert res.certificate.grid.dims == grid("disk", 128).dims
        assert res.cheeger_set and res.iterations > 5

    def test_four_stencil_upper_bound_no_better(self):
        g = spec_grid(64, kind="disk", r=1.0)
        r8 = cheeger_constant(g, "8")
        r4 = cheeger_constant(g, "4")
        assert r8.h_upper <= r4.h_upper + 0.05

    def test_refinement_does_not_hurt(self):
        coarse = cheeger_constant(spec_grid(64, kind="disk", r=1.0))
        fine = cheeger("disk", 128)
        assert abs(fine.h_upper - 2) <= abs(coarse.h_upper - 2) + 0.01
        assert fine.gap <= coarse.gap + 0.02

    def test_single_cell_four_stencil(self):
        dx = 0.5
        g = geometry.rasterize(geometry.DomainSpec.from_dict(
            {"kind": "raster", "mask": [[1]], "cell_size": dx}))
        res = cheeger_constant(g, "4", tol_h=1e-6)
        assert res.h_lower == pytest.approx(math.pi / dx, rel=1e-4)
        assert res.h_upper == pytest.approx(4 * math.sqrt(2) / dx, rel=1e-9)

    def test_json(self):
        d = json.loads(cheeger("disk", 128).to_json())
        assert set(d) >= {"h_lower", "h_upper", "resolution", "stencil", "iterations", "cheeger_set",
                          "certificate_stats"}
        assert d["certificate_stats"]["max_speed"] <= 1.05

    def test_bad_tolerance(self, square32):
        with pytest.raises(ValueError):
            cheeger_constant(square32, tol_h=0)


class TestQuotientOfCandidate:
    def test_disk_indicator(self):
        g = spec_grid(128, kind="rectangle", w=2, h=2)
        Q, t, best = quotient_of_candidate(ScalarField(g, disk_fraction(g, 0.5, (1.0, 1.0))))
        assert Q == pytest.approx(4.0, rel=0.05)
        assert best <= Q

    def test_distance_field_of_disk(self):
        g = grid("disk", 128)
        Q, t, best = quotient_of_candidate(grid_distance(g))
        assert best == pytest.approx(2.0, rel=0.03)
        assert t < 0.1
        assert Q >= best

    def test_constant_square(self):
        g = spec_grid(128, kind="rectangle", w=1, h=1)
        Q, t, best = quotient_of_candidate(ScalarField(g, np.ones(g.dims)))
        # the lowest level contour runs half a cell outside the wall
        assert best == pytest.approx(4.0, rel=0.02)
        assert Q == pytest.approx(4.0, rel=0.01)

    def test_zero_candidate(self, square32):
        with pytest.raises(DomainError):
            quotient_of_candidate(ScalarField(square32, np.zeros(square32.dims)))

    def test_negative_candidate(self, square32):
        with pytest.raises(DomainError):
            quotient_of_candidate(ScalarField(square32, -np.ones(square32.dims)))

    def test_upper_bounds_h(self):
        # any candidate's best level quotient sits above the Cheeger constant
        g = grid("l_shape", 128)
        _, _, best = quotient_of_candidate(grid_distance(g))
        assert best >= cheeger("l_shape", 128).h_lower - 0.05


class TestSubdomainSuite:
    @pytest.mark.parametrize("name", ["disk", "square"])
    def test_holds(self, name):
        rep = subdomain_bound_suite(grid(name, 128), samples=16, seed=3)
        assert rep.holds and len(rep.quotients) == 16

    def test_whole_domain_first(self):
        g = grid("square", 128)
        rep = subdomain_bound_suite(g, samples=4)
        assert rep.quotients[0] == pytest.approx(4.0)
        assert rep.bound == pytest.approx(2 * (1 + math.pi / 4))
        assert rep.quotients[0] >= rep.bound

    def test_deterministic(self):
        g = grid("disk", 128)
        a = subdomain_bound_suite(g, samples=8, seed=11)
        b = subdomain_bound_suite(g, samples=8, seed=11)
        assert a.quotients == b.quotients

    def test_keep_polygons(self):
        rep = subdomain_bound_suite(grid("disk", 128), samples=4, keep_polygons=True)
        assert len(rep.polygons) == 4
        assert rep.check().holds == rep.holds and rep.check().lhs == rep.min_quotient
