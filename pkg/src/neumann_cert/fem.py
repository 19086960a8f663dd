"""P1 finite elements for the first nonzero Neumann eigenvalue of a polygon."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from matplotlib.path import Path as MplPath
from scipy.spatial import ConvexHull, Delaunay

from .geometry import ConvexPolygon, GeometryError, Polygon, hex_Ha, metrics, omega_a, rectangle, regular_polygon, triangle_T, zigzag_domain

PI = math.pi
TARGET = 16 * PI**2
DENSE_LIMIT = 500


class MeshError(RuntimeError):
    pass


class SolverError(RuntimeError):
    pass


# ------------------------------------------------------------------ meshes


@dataclass
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.elements = np.asarray(self.elements, dtype=np.int64)

    @property
    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.elements]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def h(self) -> float:
        p = self.nodes[self.elements]
        d = [np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1) for i in range(3)]
        return float(np.max(np.maximum.reduce(d)))

    @property
    def area(self) -> float:
        return float(self.signed_areas.sum())

    def edges(self) -> np.ndarray:
        e = np.concatenate([self.elements[:, [0, 1]], self.elements[:, [1, 2]], self.elements[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def refine(self) -> "Mesh":
        """Split every triangle into four through its edge midpoints."""
        t = self.elements
        allE = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, inv = np.unique(allE, axis=0, return_inverse=True)
        inv = inv.ravel()
        mids = 0.5 * (self.nodes[uniq[:, 0]] + self.nodes[uniq[:, 1]])
        n0 = len(self.nodes)
        m = len(t)
        m01, m12, m20 = (n0 + inv[:m], n0 + inv[m:2 * m], n0 + inv[2 * m:])
        a, b, c = t[:, 0], t[:, 1], t[:, 2]
        new = np.concatenate([
            np.column_stack([a, m01, m20]),
            np.column_stack([m01, b, m12]),
            np.column_stack([m20, m12, c]),
            np.column_stack([m01, m12, m20]),
        ])
        return Mesh(np.vstack([self.nodes, mids]), new)

    def to_json(self) -> str:
        return json.dumps({"nodes": self.nodes.tolist(), "elements": self.elements.tolist()})

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _segments_distance(pts, a, b, chunk=4096):
    """Distance from each point to the closest segment [a_i, b_i]."""
    out = np.empty(len(pts))
    d = b - a
    L2 = np.einsum("ij,ij->i", d, d)
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk, None, :]
        t = np.clip(np.einsum("pij,ij->pi", p - a, d) / L2, 0.0, 1.0)
        q = a + t[..., None] * d
        out[s:s + chunk] = np.sqrt(np.min(np.sum((p - q) ** 2, axis=2), axis=1))
    return out


def _simple(v) -> bool:
    """True if no two non-adjacent edges intersect."""
    n = len(v)
    a, b = v, np.roll(v, -1, axis=0)

    def orient(p, q, r):
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if len(j) == 0:
            continue
        o1 = orient(a[i], b[i], a[j])
        o2 = orient(a[i], b[i], b[j])
        o3 = orient(a[j], b[j], a[i])
        o4 = orient(a[j], b[j], b[i])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return False
    return True


def triangulate(poly: Polygon, h_target: float) -> Mesh:
    """Boundary-conforming triangulation with element diameter <= h_target."""
    if not (h_target > 0 and math.isfinite(h_target)):
        raise MeshError("h_target must be positive")
    v = np.asarray(poly.vertices, dtype=float)
    if not isinstance(poly, ConvexPolygon) and not _simple(v):
        raise MeshError("polygon is self-intersecting")
    a, b = v, np.roll(v, -1, axis=0)
    path = MplPath(np.vstack([v, v[:1]]), closed=True)
    area = poly.area
    s = 0.7 * h_target
    for _ in range(8):
        bpts = []
        for i in range(len(v)):
            m = max(1, math.ceil(np.linalg.norm(b[i] - a[i]) / s))
            t = np.arange(m)[:, None] / m
            bpts.append(a[i] + t * (b[i] - a[i]))
        bpts = np.vstack(bpts)
        lo, hi = v.min(axis=0), v.max(axis=0)
        ys = np.arange(lo[1], hi[1] + s, s * math.sqrt(3) / 2)
        rows = []
        for r, y in enumerate(ys):
            xs = np.arange(lo[0] + (s / 2) * (r % 2), hi[0] + s, s)
            rows.append(np.column_stack([xs, np.full_like(xs, y)]))
        lat = np.vstack(rows)
        lat = lat[path.contains_points(lat)]
        if len(lat):
            lat = lat[_segments_distance(lat, a, b) > 0.45 * s]
        pts = np.vstack([bpts, lat])
        tri = Delaunay(pts)
        el = tri.simplices
        cen = pts[el].mean(axis=1)
        el = el[path.contains_points(cen)]
        mesh = Mesh(pts, el)
        sa = mesh.signed_areas
        flip = sa < 0
        mesh.elements[flip] = mesh.elements[flip][:, [0, 2, 1]]
        mesh = Mesh(pts, mesh.elements[np.abs(sa) > 1e-14 * area])
        if abs(mesh.area - area) <= 1e-12 * max(1.0, area) and mesh.h <= h_target and _conforming(mesh, len(bpts)):
            return _drop_unused(mesh)
        s *= 0.85
    raise MeshError("could not build a conforming mesh; try a smaller h_target")


def _conforming(mesh: Mesh, nb: int) -> bool:
    """Every boundary segment between consecutive boundary samples is a mesh edge."""
    i = np.arange(nb)
    want = np.sort(np.column_stack([i, (i + 1) % nb]), axis=1)
    have = mesh.edges()
    key = lambda e: e[:, 0].astype(np.int64) * (len(mesh.nodes) + 1) + e[:, 1]
    return bool(np.all(np.isin(key(want), key(have))))


def _drop_unused(mesh: Mesh) -> Mesh:
    used = np.unique(mesh.elements)
    remap = -np.ones(len(mesh.nodes), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return Mesh(mesh.nodes[used], remap[mesh.elements])


# ----------------------------------------------------------------- solver


def assemble(mesh: Mesh):
    """P1 stiffness and consistent mass matrices."""
    p = mesh.nodes[mesh.elements]
    area = mesh.signed_areas
    if np.any(area <= 0):
        raise MeshError("inverted or degenerate element")
    # gradients of barycentric coordinates: edge opposite vertex i rotated by 90 degrees
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    Ke = np.einsum("eik,ejk->eij", e, e) / (4 * area[:, None, None])
    Me = (np.ones((3, 3)) + np.eye(3))[None] * (area / 12)[:, None, None]
    r = np.repeat(mesh.elements, 3, axis=1).ravel()
    c = np.tile(mesh.elements, (1, 3)).ravel()
    n = len(mesh.nodes)
    K = sp.coo_matrix((Ke.ravel(), (r, c)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (r, c)), shape=(n, n)).tocsr()
    return K, M


@dataclass
class EigResult:
    mu1: float
    h: float
    dof: int
    zero_mode: float
    residual: float
    extrapolated: float | None = None
    fine_mu1: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _smallest(K, M, count=3):
    n = K.shape[0]
    if n <= DENSE_LIMIT:
        w, V = sla.eigh(K.toarray(), M.toarray(), subset_by_index=[0, count - 1])
        return w, V
    scale = K.diagonal().mean() / M.diagonal().mean()
    # fixed start vector: ARPACK otherwise draws one at random and results drift in the last bits
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        w, V = spla.eigsh(K, k=count, M=M, sigma=-1e-3 * scale, which="LM", tol=1e-12, v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise SolverError("eigensolver did not converge") from exc
    order = np.argsort(w)
    return w[order], V[:, order]


def _solve(mesh: Mesh):
    K, M = assemble(mesh)
    w, V = _smallest(K, M)
    mu, v = float(w[1]), V[:, 1]
    Mv = M @ v
    res = float(np.linalg.norm(K @ v - mu * Mv) / (np.linalg.norm(Mv) * max(1.0, mu)))
    if not mu > 0:
        raise SolverError(f"nonpositive first eigenvalue {mu}")
    if res > 1e-8:
        raise SolverError(f"eigen residual {res:.3g} above 1e-8")
    return mu, float(w[0]), res


def mu1_fem(poly: Polygon, h_target: float, extrapolate: bool = False, mesh: Mesh | None = None) -> EigResult:
    """Smallest nonzero Neumann eigenvalue. With extrapolate, also solve on the refined mesh."""
    mesh = triangulate(poly, h_target) if mesh is None else mesh
    mu, zero, res = _solve(mesh)
    out = EigResult(mu, mesh.h, len(mesh.nodes), zero, res)
    if extrapolate:
        fine = mesh.refine()
        mu2, _, res2 = _solve(fine)
        out.fine_mu1 = mu2
        out.extrapolated = (4 * mu2 - mu) / 3  # P1 eigenvalues converge like h^2
        out.residual = max(res, res2)
    return out


# ----------------------------------------------------------- shape scans


def symmetric_polygon(rng: np.random.Generator, points: int = 6) -> ConvexPolygon:
    """Random convex polygon symmetric in both coordinate axes."""
    while True:
        q = rng.uniform(0.05, 1.0, size=(points, 2))
        q = q * rng.uniform(0.3, 1.0, size=2)
        full = np.vstack([q, q * [-1, 1], q * [1, -1], -q])
        hull = ConvexHull(full)
        try:
            return ConvexPolygon(full[hull.vertices])
        except GeometryError:
            continue


def random_convex_polygon(rng: np.random.Generator, points: int = 12) -> ConvexPolygon:
    while True:
        p = rng.uniform(-1, 1, size=(points, 2)) * rng.uniform(0.2, 1.0, size=2)
        hull = ConvexHull(p)
        try:
            return ConvexPolygon(p[hull.vertices])
        except GeometryError:
            continue


def ca_shape(a: float, t: float) -> ConvexPolygon:
    """Member of the family between the midpoint hexagon (t=0) and the truncated triangle (t=1)."""
    H = hex_Ha(a).vertices
    O = omega_a(a).vertices
    pts = []
    for i in range(6):
        h0, h1 = H[i], H[(i + 1) % 6]
        mid = (h0 + h1) / 2
        pts.append(h0)
        if t > 0:
            pts.append(mid + t * (O[i] - mid))
    return ConvexPolygon(np.array(pts))


@dataclass
class ScanRow:
    shape_id: str
    perimeter: float
    mu1: float
    scaled: float
    margin: float  # 16 pi^2 - P^2 mu1

    def as_dict(self):
        return asdict(self)


def _row(name, poly, cells):
    m = metrics(poly) if isinstance(poly, ConvexPolygon) else None
    size = m.diameter if m else float(np.ptp(poly.vertices, axis=0).max())
    r = mu1_fem(poly, size / cells)
    sc = poly.perimeter**2 * r.mu1
    return ScanRow(name, poly.perimeter, r.mu1, sc, TARGET - sc)


def conjecture_scan(count: int = 100, seed: int = 0, cells: int = 30, include_reference: bool = True,
                    ca_count: int = 10) -> list[ScanRow]:
    rng = np.random.default_rng(seed)
    rows = []
    if include_reference:
        rows.append(_row("square", rectangle(1.0, 1.0), cells))
        rows.append(_row("equilateral-triangle", triangle_T(), cells))
    for i in range(count):
        rows.append(_row(f"two-axis-{i:03d}", symmetric_polygon(rng), cells))
    for i in range(ca_count):
        a = float(rng.uniform(0.05, 0.3))
        t = float(rng.uniform(0.0, 1.0))
        rows.append(_row(f"ca-a{a:.4f}-t{t:.3f}", ca_shape(a, t), cells))
    return rows


@dataclass
class ZigzagReport:
    a: float
    n: int
    perimeter: float
    h: float
    dof: int
    mu1: float
    scaled: float
    square_limit: float
    target: float
    exceeds_target: bool

    def as_dict(self):
        return asdict(self)


def zigzag_demo(a: float = 0.2, n: int = 40, h: float | None = None) -> ZigzagReport:
    """Non-convex domains of unit perimeter whose P^2 mu_1 tends to pi^2/a^2."""
    h_max = a / (4 * n)
    h = h_max if h is None else h
    if h > h_max * (1 + 1e-12):
        raise MeshError(f"h={h} does not resolve the teeth; need h <= a/(4n) = {h_max}")
    poly = zigzag_domain(a, n)
    r = mu1_fem(poly, h)
    sc = poly.perimeter**2 * r.mu1
    return ZigzagReport(a, n, poly.perimeter, r.h, r.dof, r.mu1, sc, PI**2 / a**2, TARGET, bool(sc > TARGET))


def shape_by_name(name: str) -> Polygon:
    if name == "square":
        return rectangle(1.0, 1.0)
    if name == "triangle":
        return triangle_T()
    if name.startswith("ngon"):
        n = int(name[4:] or 64)
        p = regular_polygon(n)
        return p.transformed(scale=math.sqrt(PI / p.area))
    raise ValueError(f"unknown shape {name!r}; use square, triangle or ngon<N>")
