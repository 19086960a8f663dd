import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon as ShapelyPolygon

from neumann_cert import geometry as g
from neumann_cert.fem import random_convex_polygon, symmetric_polygon

SQRT3 = math.sqrt(3)


def test_unit_square_metrics():
    m = g.metrics(g.rectangle(1, 1))
    assert (m.perimeter, m.area) == (4, 1)
    assert m.diameter == pytest.approx(math.sqrt(2), rel=1e-15)
    assert m.min_width == pytest.approx(1, rel=1e-15)


def test_equilateral_triangle_metrics():
    m = g.metrics(g.triangle_T())
    assert m.perimeter == pytest.approx(3, rel=1e-15)
    assert m.area == pytest.approx(SQRT3 / 4, rel=1e-15)
    assert m.min_width == pytest.approx(SQRT3 / 2, rel=1e-15)
    assert m.diameter == pytest.approx(1, rel=1e-15)


def test_midpoint_hexagon_quarter_ratio():
    m = g.metrics(g.hex_Ha(0.25))
    assert m.perimeter**2 / m.area == pytest.approx(42 * SQRT3 / 5, rel=1e-12)


@pytest.mark.parametrize("a", [0.0, 0.1, 0.25, 0.4, 0.5])
def test_hat_triangle_is_equilateral_with_top_side(a):
    v = g.hat_triangle(a).vertices
    sides = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    assert np.allclose(sides, sides[0], rtol=1e-14)
    top = np.sort(v[:, 1])[-2:]
    assert np.allclose(top, SQRT3 * (1 - a) / 2, atol=1e-15)


def test_hat_triangle_endpoints():
    # a = 0: side 2, circumscribed to T, each vertex of T on a side midpoint
    t0 = g.hat_triangle(0.0)
    assert t0.area == pytest.approx(SQRT3, rel=1e-14)
    v = t0.vertices
    mids = (v + np.roll(v, -1, axis=0)) / 2
    T = g.triangle_T().vertices
    assert all(np.min(np.linalg.norm(mids - p, axis=1)) < 1e-15 for p in T)
    # a = 1/2: the inscribed triangle with horizontal top side at height sqrt3/4
    t = g.hat_triangle(0.5)
    ref = np.array([[0, 0], [0.25, SQRT3 / 4], [-0.25, SQRT3 / 4]])
    assert np.allclose(t.vertices, ref, atol=1e-15)


@pytest.mark.parametrize("a", [0.05, 0.15, 0.3, 0.45])
def test_omega_is_clipped_hat_triangle(a):
    clip = ShapelyPolygon(g.hat_triangle(a).vertices).intersection(ShapelyPolygon(g.triangle_T().vertices))
    om = g.omega_a(a)
    assert clip.area == pytest.approx(om.area, rel=1e-12)
    assert clip.symmetric_difference(ShapelyPolygon(om.vertices)).area < 1e-14
    cv = np.array(clip.exterior.coords)[:-1]
    for p in om.vertices:
        assert np.min(np.linalg.norm(cv - p, axis=1)) < 1e-14


@given(st.floats(0.001, 0.499))
def test_hexagon_closed_forms(a):
    h = g.hex_Ha(a)
    assert h.perimeter == pytest.approx(3 * math.sqrt(1 - 3 * a + 3 * a * a), rel=1e-12)
    assert h.area == pytest.approx(SQRT3 * (2 - 3 * a) / 8, rel=1e-12)
    o = g.omega_a(a)
    assert o.perimeter == pytest.approx(3 * (1 - a), rel=1e-12)
    assert g.metrics(o).perimeter == pytest.approx(3 * (1 - a), rel=1e-12)


@pytest.mark.parametrize("a", [0.1, 0.2, 0.3])
def test_omega_contains_midpoint_hexagon(a):
    o = ShapelyPolygon(g.omega_a(a).vertices)
    assert o.buffer(1e-14).contains(ShapelyPolygon(g.hex_Ha(a).vertices))


def test_regular_polygons():
    sq = g.regular_polygon(4)
    assert sq.perimeter == pytest.approx(4 * math.sqrt(2), rel=1e-14)
    assert sq.area == pytest.approx(2, rel=1e-14)
    assert 5 * math.tan(math.pi / 5) < 3.633
    p = g.regular_polygon(5)
    # P^2 / (4A) = N tan(pi/N)
    assert p.perimeter**2 / (4 * p.area) == pytest.approx(5 * math.tan(math.pi / 5), rel=1e-13)
    p = g.regular_polygon(100)
    assert p.perimeter**2 / p.area == pytest.approx(4 * math.pi, rel=1e-3)


@pytest.mark.parametrize("n", [1, 5, 40])
def test_zigzag_has_unit_perimeter(n):
    assert g.zigzag_domain(0.2, n).perimeter == pytest.approx(1, rel=1e-13)


def test_zigzag_teeth_shrink():
    a = 0.2
    b = math.sqrt(1 / (16 * a * a) - 1)
    for n in (1, 5, 40):
        v = g.zigzag_domain(a, n).vertices
        out = np.max(np.column_stack([-v[:, 1], v[:, 0] - a, v[:, 1] - a, -v[:, 0]]), axis=1)
        assert out.max() == pytest.approx(a * b / (2 * n), rel=1e-12)


def test_zigzag_degenerates_to_square():
    z = g.zigzag_domain(0.25, 1)
    assert z.n == 4 and z.perimeter == pytest.approx(1)
    with pytest.raises(g.GeometryError, match="not convex"):
        g.ConvexPolygon(g.zigzag_domain(0.2, 3).vertices)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_convex_invariants(seed):
    rng = np.random.default_rng(seed)
    p = random_convex_polygon(rng)
    m = g.metrics(p)
    assert m.perimeter > 2 * m.diameter
    assert m.min_width <= m.diameter
    th = rng.uniform(0, 2 * math.pi)
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    m2 = g.metrics(p.transformed(R, shift=rng.normal(size=2)))
    for x, y in [(m.perimeter, m2.perimeter), (m.area, m2.area), (m.diameter, m2.diameter),
                 (m.min_width, m2.min_width)]:
        assert x == pytest.approx(y, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_width_and_diameter_against_brute_force(seed):
    p = random_convex_polygon(np.random.default_rng(seed))
    v = p.vertices
    th = np.linspace(0, math.pi, 20001)
    proj = v @ np.vstack([np.cos(th), np.sin(th)])
    widths = proj.max(axis=0) - proj.min(axis=0)
    m = g.metrics(p)
    assert m.min_width <= widths.min() + 1e-12
    # the sampled minimum overshoots by at most diameter * angular step
    assert m.min_width >= widths.min() - m.diameter * (th[1] - th[0])
    diam = max(np.linalg.norm(v[i] - v[j]) for i in range(len(v)) for j in range(len(v)))
    assert m.diameter == pytest.approx(diam, rel=1e-14)


@given(st.floats(0.01, 10), st.floats(0.01, 10))
def test_rectangle_width(L, l):
    m = g.metrics(g.rectangle(L, l))
    assert m.min_width == pytest.approx(min(L, l), rel=1e-12)
    assert m.diameter == pytest.approx(math.hypot(L, l), rel=1e-12)


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.05, math.pi - 0.05))
def test_parallelogram_inequality(u, w, angle):
    p = g.ConvexPolygon([[0, 0], [u, 0], [u + w * math.cos(angle), w * math.sin(angle)],
                         [w * math.cos(angle), w * math.sin(angle)]])
    m = g.metrics(p)
    assert m.perimeter * m.min_width <= 4 * m.area * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_two_axis_symmetric_inequality(seed):
    m = g.metrics(symmetric_polygon(np.random.default_rng(seed)))
    assert m.perimeter * m.min_width <= 4 * m.area * (1 + 1e-12)


def test_json_round_trip(tmp_path):
    p = g.hex_Ha(0.1234567)
    path = tmp_path / "h.json"
    g.write_polygon(p, path)
    q = g.read_polygon(path)
    assert np.array_equal(p.vertices, q.vertices)
    assert "vertices" in json.loads(path.read_text())


@pytest.mark.parametrize("verts, msg", [
    ([[0, 0], [1, 0]], "at least 3"),
    ([[0, 0], [0, 1], [1, 1], [1, 0]], "counter-clockwise"),
    ([[0, 0], [2, 0], [1, 0.2], [2, 2], [0, 2]], "not convex"),
    ([[0, 0], [1, 0], [2, 0]], "degenerate"),
    ([[0, 0], [1, 0], [float("nan"), 1]], "finite"),
])
def test_invalid_polygons(verts, msg):
    with pytest.raises(g.GeometryError, match=msg):
        g.ConvexPolygon(verts)


def test_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(g.GeometryError, match="malformed"):
        g.read_polygon(path)
    path.write_text('{"points": []}')
    with pytest.raises(g.GeometryError):
        g.read_polygon(path)


@pytest.mark.parametrize("fn, a", [(g.hat_triangle, -0.1), (g.hat_triangle, 0.6), (g.omega_a, 0.0),
                                   (g.hex_Ha, 0.5), (g.zigzag_domain, 0.3)])
def test_parameter_ranges(fn, a):
    with pytest.raises(g.GeometryError):
        fn(a) if fn is not g.zigzag_domain else fn(a, 3)
