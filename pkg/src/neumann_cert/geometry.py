"""Convex polygon kernel: metrics, rotating calipers, shape generators, JSON I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SQRT3 = math.sqrt(3.0)
CONVEXITY_TOL = 1e-12
MIN_AREA = 1e-14


class GeometryError(ValueError):
    pass


def _as_vertices(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise GeometryError(f"vertices must be an (n, 2) array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vertices must be finite")
    return v


def signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def edge_cross(v: np.ndarray) -> np.ndarray:
    """Cross product of each edge with the next one (positive at convex CCW corners)."""
    e = np.roll(v, -1, axis=0) - v
    en = np.roll(e, -1, axis=0)
    return e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, counter-clockwise. Used directly only for non-convex FEM inputs."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _as_vertices(self.vertices)
        if len(v) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        d = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        if np.any(d == 0.0):
            raise GeometryError("duplicate consecutive vertices")
        a = signed_area(v)
        if abs(a) < MIN_AREA:
            raise GeometryError(f"degenerate polygon (area {a:.3g})")
        if a < 0:
            raise GeometryError("vertices must be counter-clockwise")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        return float(np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1).sum())

    def transformed(self, matrix=None, shift=(0.0, 0.0), scale: float = 1.0):
        m = np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)
        return type(self)(scale * self.vertices @ m.T + np.asarray(shift, dtype=float))


@dataclass(frozen=True)
class ConvexPolygon(Polygon):
    def __post_init__(self):
        super().__post_init__()
        cr = edge_cross(self.vertices)
        if np.any(cr < -CONVEXITY_TOL):
            i = int(np.argmin(cr))
            raise GeometryError(f"polygon is not convex at vertex {(i + 1) % self.n} (cross {cr[i]:.3g})")


@dataclass(frozen=True)
class ShapeMetrics:
    perimeter: float
    area: float
    diameter: float
    min_width: float
    width_direction: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "perimeter": self.perimeter,
            "area": self.area,
            "diameter": self.diameter,
            "min_width": self.min_width,
            "width_direction": list(self.width_direction),
        }


def rotating_calipers(v: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Diameter, minimal width and width normal of a convex CCW polygon.

    For each edge the farthest vertex is tracked with a pointer that only
    moves forward, so the whole sweep is linear in the number of vertices.
    """
    n = len(v)
    nxt = np.roll(v, -1, axis=0)
    edges = nxt - v
    lengths = np.linalg.norm(edges, axis=1)

    def height(i, j):
        e = edges[i]
        d = v[j % n] - v[i]
        return (e[0] * d[1] - e[1] * d[0]) / lengths[i]

    scale = float(np.max(np.abs(v))) or 1.0
    tol = 1e-14 * scale
    diam2 = 0.0
    width = math.inf
    normal = np.array([0.0, 1.0])
    j = 1
    for i in range(n):
        if j <= i:
            j = i + 1
        steps = 0
        while steps < n and height(i, j + 1) > height(i, j) + tol:
            j += 1
            steps += 1
        h = height(i, j)
        if h < width:
            width = h
            e = edges[i] / lengths[i]
            normal = np.array([-e[1], e[0]])
        for p in (v[i], nxt[i]):
            for q in (v[j % n], v[(j - 1) % n], v[(j + 1) % n]):
                diam2 = max(diam2, float(np.dot(p - q, p - q)))
    return math.sqrt(diam2), float(width), normal


def metrics(poly: ConvexPolygon) -> ShapeMetrics:
    if not isinstance(poly, ConvexPolygon):
        poly = ConvexPolygon(poly.vertices)
    d, w, nu = rotating_calipers(poly.vertices)
    return ShapeMetrics(poly.perimeter, poly.area, d, w, (float(nu[0]), float(nu[1])))


# ---------------------------------------------------------------- generators


def triangle_T() -> ConvexPolygon:
    return ConvexPolygon([[-0.5, 0.0], [0.5, 0.0], [0.0, SQRT3 / 2]])


def _check_range(name, a, lo, hi, lo_open=False, hi_open=False):
    bad = (a < lo or a > hi) or (lo_open and a == lo) or (hi_open and a == hi)
    if bad or not math.isfinite(a):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise GeometryError(f"{name}={a} outside {lb}{lo}, {hi}{rb}")


def hat_triangle(a: float) -> ConvexPolygon:
    """Upside-down equilateral triangle with top side at height sqrt(3)(1-a)/2."""
    _check_range("a", a, 0.0, 0.5)
    top = SQRT3 * (1 - a) / 2
    half = 1 - 1.5 * a
    return ConvexPolygon([[0.0, -SQRT3 * (0.5 - a)], [half, top], [-half, top]])


def omega_a(a: float) -> ConvexPolygon:
    """The hexagon cut from the unit triangle by the reversed triangle of parameter a."""
    _check_range("a", a, 0.0, 0.5, lo_open=True, hi_open=True)
    top = SQRT3 * (1 - a) / 2
    return ConvexPolygon([
        [0.5 - a, 0.0],
        [(1 - a) / 2, SQRT3 * a / 2],
        [a / 2, top],
        [-a / 2, top],
        [-(1 - a) / 2, SQRT3 * a / 2],
        [-(0.5 - a), 0.0],
    ])


def hex_Ha(a: float) -> ConvexPolygon:
    """Midpoint hexagon of omega_a(a)."""
    _check_range("a", a, 0.0, 0.5, lo_open=True, hi_open=True)
    return ConvexPolygon([
        [0.0, 0.0],
        [0.5 - 0.75 * a, SQRT3 * a / 4],
        [0.25, SQRT3 / 4],
        [0.0, SQRT3 * (1 - a) / 2],
        [-0.25, SQRT3 / 4],
        [-(0.5 - 0.75 * a), SQRT3 * a / 4],
    ])


def regular_polygon(n: int, circumradius: float = 1.0) -> ConvexPolygon:
    if int(n) != n or n < 3:
        raise GeometryError(f"regular polygon needs an integer N >= 3, got {n}")
    t = 2 * np.pi * np.arange(n) / n
    return ConvexPolygon(circumradius * np.column_stack([np.cos(t), np.sin(t)]))


def rectangle(length: float, height: float) -> ConvexPolygon:
    return ConvexPolygon([[0, 0], [length, 0], [length, height], [0, height]])


def zigzag_domain(a: float, n: int) -> Polygon:
    """Square [0,a]^2 with n outward isosceles teeth on every side; perimeter 1.

    Tooth legs have length 1/(8n) and height a*b/(2n), b = sqrt(1/(16 a^2) - 1).
    Not convex; meant for the FEM module only.
    """
    _check_range("a", a, 0.0, 0.25, lo_open=True)
    if int(n) != n or n < 1:
        raise GeometryError(f"n must be a positive integer, got {n}")
    b = math.sqrt(max(1.0 / (16 * a * a) - 1.0, 0.0))
    if b == 0.0:
        return Polygon([[0, 0], [a, 0], [a, a], [0, a]])
    height = a * b / (2 * n)
    corners = np.array([[0, 0], [a, 0], [a, a], [0, a]], dtype=float)
    pts = []
    for s in range(4):
        p0, p1 = corners[s], corners[(s + 1) % 4]
        t = (p1 - p0) / a
        out = np.array([t[1], -t[0]])  # outward normal of a CCW square
        for k in range(2 * n):
            off = height if k % 2 else 0.0
            pts.append(p0 + (k * a / (2 * n)) * t + off * out)
    return Polygon(np.array(pts))


# ------------------------------------------------------------------ file I/O


def polygon_to_json(poly: Polygon) -> str:
    rows = ", ".join(f"[{x:.17g}, {y:.17g}]" for x, y in poly.vertices)
    return '{"vertices": [' + rows + "]}"


def write_polygon(poly: Polygon, path) -> None:
    Path(path).write_text(polygon_to_json(poly) + "\n")


def polygon_from_dict(data: dict, convex: bool = True) -> Polygon:
    if not isinstance(data, dict) or "vertices" not in data:
        raise GeometryError('polygon JSON must be an object with a "vertices" list')
    cls = ConvexPolygon if convex else Polygon
    return cls(data["vertices"])


def read_polygon(path, convex: bool = True) -> Polygon:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GeometryError(f"{path}: malformed JSON ({exc})") from exc
    return polygon_from_dict(data, convex=convex)
