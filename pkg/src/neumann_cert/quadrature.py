"""Adaptive cubature over triangles and polygons (test oracle, not on the certified path).

Each cell is integrated with the 16-point degree-8 symmetric rule of Dunavant
(positive weights). A cell is accepted when the difference between its own
estimate and the sum over its four midpoint children falls below its share of
the tolerance; otherwise the children are subdivided in the next pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RULE_DEGREE = 8
MAX_CELLS = 1_000_000


def _dunavant8():
    orbits3 = [
        (0.459292588292723, 0.095091634267285),
        (0.170569307751760, 0.103217370534718),
        (0.050547228317031, 0.032458497623198),
    ]
    bary = [(1 / 3, 1 / 3, 1 / 3)]
    w = [0.144315607677787]
    for a, wt in orbits3:
        b = 1 - 2 * a
        bary += [(a, a, b), (a, b, a), (b, a, a)]
        w += [wt] * 3
    p, q = 0.263112829634638, 0.008394777409958
    r = 1 - p - q
    for t in [(p, q, r), (p, r, q), (q, p, r), (q, r, p), (r, p, q), (r, q, p)]:
        bary.append(t)
        w.append(0.027230314174435)
    w = np.array(w)
    return np.array(bary), w / w.sum()


BARY, WEIGHTS = _dunavant8()


class QuadratureError(RuntimeError):
    def __init__(self, msg, partial=None, error=None):
        super().__init__(msg)
        self.partial = partial
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    cells: int
    degree: int = RULE_DEGREE


def triangle_area(tris) -> np.ndarray:
    """Unsigned areas, with edge vectors taken from the vertex opposite the longest edge.

    The two shorter edges are never both long and nearly parallel, so needle
    triangles keep their relative accuracy.
    """
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    opp = np.stack([tris[:, 2] - tris[:, 1], tris[:, 0] - tris[:, 2], tris[:, 1] - tris[:, 0]], 1)
    longest = np.argmax(np.einsum("mkd,mkd->mk", opp, opp), axis=1)
    m = np.arange(len(tris))
    o = tris[m, longest]
    e1 = tris[m, (longest + 1) % 3] - o
    e2 = tris[m, (longest + 2) % 3] - o
    return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _rule(f, tris, area):
    """Apply the base rule to triangles of shape (m, 3, 2) with known areas."""
    pts = np.einsum("qk,mkd->mqd", BARY, tris)
    vals = np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float)
    vals = np.broadcast_to(vals, pts.shape[:2])
    return area * (vals @ WEIGHTS)


def _children(tris):
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    kids = np.stack([
        np.stack([a, ab, ca], 1),
        np.stack([ab, b, bc], 1),
        np.stack([ca, bc, c], 1),
        np.stack([ab, bc, ca], 1),
    ], 1)
    return kids.reshape(-1, 3, 2)


def _integrate_many(f, tris, rel_tol, abs_tol=1e-14, max_cells=MAX_CELLS):
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    if rel_tol < 1e-13:
        raise ValueError("rel_tol must be >= 1e-13")
    area = triangle_area(tris)
    total_area = area.sum()
    if total_area == 0.0:
        return QuadResult(0.0, 0.0, len(tris))
    parent = _rule(f, tris, area)
    accepted_val = 0.0
    accepted_err = 0.0
    cells = len(tris)
    active, active_area, active_parent = tris, area, parent
    while len(active):
        kids = _children(active)
        kid_area = np.repeat(active_area / 4, 4)  # exact; recomputing loses digits on needles
        cells += len(kids)
        kid_vals = _rule(f, kids, kid_area)
        kv = kid_vals.reshape(-1, 4).sum(1)
        err = np.abs(kv - active_parent)
        # tolerance share proportional to cell area, against the current global estimate
        est = accepted_val + kv.sum()
        share = active_area / total_area
        ok = err <= (rel_tol * abs(est) + abs_tol) * share
        accepted_val += kv[ok].sum()
        accepted_err += err[ok].sum()
        todo = ~ok
        if not todo.any():
            break
        if cells + 16 * todo.sum() > max_cells:
            partial = accepted_val + kv[todo].sum()
            raise QuadratureError(
                f"cell budget {max_cells} exhausted", partial=partial, error=accepted_err + err[todo].sum()
            )
        active = kids.reshape(-1, 4, 3, 2)[todo].reshape(-1, 3, 2)
        active_area = kid_area.reshape(-1, 4)[todo].ravel()
        active_parent = kid_vals.reshape(-1, 4)[todo].ravel()
    return QuadResult(float(accepted_val), float(accepted_err), int(cells))


def integrate_triangle(f, tri, rel_tol: float = 1e-12, abs_tol: float = 1e-14) -> QuadResult:
    """Integrate f(x, y) (vectorized) over a triangle given as 3 points."""
    return _integrate_many(f, np.asarray(tri, dtype=float)[None], rel_tol, abs_tol)


def fan(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    c = v.mean(axis=0)
    nxt = np.roll(v, -1, axis=0)
    return np.stack([np.broadcast_to(c, v.shape), v, nxt], 1)


def integrate_polygon(f, poly, rel_tol: float = 1e-12, abs_tol: float = 1e-14) -> QuadResult:
    """Integrate over a convex polygon through a fan from its vertex centroid."""
    v = getattr(poly, "vertices", poly)
    return _integrate_many(f, fan(v), rel_tol, abs_tol)


def integrate_triangles(f, tris, rel_tol: float = 1e-12, abs_tol: float = 1e-14) -> QuadResult:
    """Integrate over the union of several triangles."""
    return _integrate_many(f, tris, rel_tol, abs_tol)


def integrate_fixed(f, tris, levels: int = 3) -> float:
    """Non-adaptive estimate on `levels` uniform midpoint refinements (4**levels cells per triangle)."""
    t = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    area = triangle_area(t)
    for _ in range(levels):
        t = _children(t)
        area = np.repeat(area / 4, 4)
    return float(_rule(f, t, area).sum())
